"""Pure-numpy implementations of the per-pixel kernels.

These are the fallback used when the compiled extension is unavailable and
the ground truth the extension is tested against: both implementations must
produce bit-identical output. Rounding is floor(x + 0.5) throughout so the
C and numpy paths agree on halfway cases.
"""

import numpy as np

_HUE_SCALE = 255.0 / 360.0


def _check_rgb(rgb):
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB array, got shape {rgb.shape}")
    if rgb.shape[0] == 0 or rgb.shape[1] == 0:
        raise ValueError("zero-sized frame")
    if rgb.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got {rgb.dtype}")


def hsv_planes(rgb, downscale=1):
    """Nearest-neighbor downscale, then RGB -> HSV as three uint8 planes.

    Hue is mapped linearly from [0, 360) degrees to [0, 255]; saturation and
    value are scaled to [0, 255]. Returns a (3, h, w) uint8 array (H, S, V).
    """
    _check_rgb(rgb)
    if downscale < 1:
        raise ValueError("downscale must be >= 1")
    small = rgb[::downscale, ::downscale]

    r = small[:, :, 0].astype(np.float64)
    g = small[:, :, 1].astype(np.float64)
    b = small[:, :, 2].astype(np.float64)
    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = v - mn

    safe_delta = np.where(delta == 0.0, 1.0, delta)
    hue_r = 60.0 * ((g - b) / safe_delta)
    hue_r = np.where(hue_r < 0.0, hue_r + 360.0, hue_r)
    hue_g = 60.0 * ((b - r) / safe_delta + 2.0)
    hue_b = 60.0 * ((r - g) / safe_delta + 4.0)
    # Branch priority matches the scalar code: max==r, then max==g, then max==b.
    hue = np.where(
        delta == 0.0,
        0.0,
        np.where(v == r, hue_r, np.where(v == g, hue_g, hue_b)),
    )

    safe_v = np.where(v == 0.0, 1.0, v)
    sat = np.where(v == 0.0, 0.0, np.floor((255.0 * delta) / safe_v + 0.5))

    out = np.empty((3,) + small.shape[:2], dtype=np.uint8)
    out[0] = np.floor(hue * _HUE_SCALE + 0.5).astype(np.uint8)
    out[1] = sat.astype(np.uint8)
    out[2] = v.astype(np.uint8)
    return out


def mean_abs_diff(a, b):
    """Mean over channels of the per-pixel mean absolute difference.

    Inputs are (3, h, w) uint8 plane stacks of equal shape; the result lies
    in [0, 255]. Channel sums fit exactly in float64, so the value is
    independent of summation order.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a.astype(np.int64) - b.astype(np.int64))
    n = float(diff.shape[1] * diff.shape[2])
    m0 = float(diff[0].sum()) / n
    m1 = float(diff[1].sum()) / n
    m2 = float(diff[2].sum()) / n
    return (m0 + m1 + m2) / 3.0


def rgb_to_gray(rgb):
    """8-bit luma plane: round(0.299 R + 0.587 G + 0.114 B) per pixel."""
    _check_rgb(rgb)
    r = rgb[:, :, 0].astype(np.float64)
    g = rgb[:, :, 1].astype(np.float64)
    b = rgb[:, :, 2].astype(np.float64)
    y = np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5)
    return np.minimum(y, 255.0).astype(np.uint8)
