"""The compiled kernels must match the numpy reference bit for bit."""

import numpy as np
import pytest

from annotheia import kernels
from annotheia.kernels import reference


def random_frame(rng, h=None, w=None):
    h = h or int(rng.integers(1, 80))
    w = w or int(rng.integers(1, 80))
    return rng.integers(0, 256, (h, w, 3), dtype=np.uint8)


def test_backend_selected():
    assert kernels.BACKEND in ("native", "python")


@pytest.mark.skipif(kernels.BACKEND != "native", reason="extension not built")
def test_native_matches_reference_exactly():
    rng = np.random.default_rng(7)
    for _ in range(50):
        frame = random_frame(rng)
        downscale = int(rng.integers(1, 5))
        native = np.asarray(kernels.hsv_planes(frame, downscale))
        ref = reference.hsv_planes(frame, downscale)
        assert np.array_equal(native, ref)
        assert np.array_equal(np.asarray(kernels.rgb_to_gray(frame)),
                              reference.rgb_to_gray(frame))
    for _ in range(50):
        a = reference.hsv_planes(random_frame(rng, 33, 41))
        b = reference.hsv_planes(random_frame(rng, 33, 41))
        assert kernels.mean_abs_diff(a, b) == reference.mean_abs_diff(a, b)


def test_hue_mapping_endpoints():
    red = np.full((2, 2, 3), (255, 0, 0), dtype=np.uint8)
    green = np.full((2, 2, 3), (0, 255, 0), dtype=np.uint8)
    blue = np.full((2, 2, 3), (0, 0, 255), dtype=np.uint8)
    assert reference.hsv_planes(red)[0, 0, 0] == 0
    assert reference.hsv_planes(green)[0, 0, 0] == 85  # round(120/360 * 255)
    assert reference.hsv_planes(blue)[0, 0, 0] == 170  # round(240/360 * 255)


def test_gray_luma_rounding():
    frame = np.zeros((1, 1, 3), dtype=np.uint8)
    frame[0, 0] = (10, 20, 30)
    expected = int(np.floor(0.299 * 10 + 0.587 * 20 + 0.114 * 30 + 0.5))
    assert reference.rgb_to_gray(frame)[0, 0] == expected


def test_downscale_strides():
    frame = np.arange(8 * 8 * 3, dtype=np.uint8).reshape(8, 8, 3)
    planes = reference.hsv_planes(frame, downscale=4)
    assert planes.shape == (3, 2, 2)


def test_zero_sized_frame_rejected():
    with pytest.raises(ValueError):
        reference.hsv_planes(np.zeros((0, 4, 3), dtype=np.uint8))
