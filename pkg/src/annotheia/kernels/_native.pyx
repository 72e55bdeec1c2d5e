# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels. Must stay bit-identical to reference.py."""

import numpy as np

from libc.math cimport floor

DEF HUE_SCALE = 255.0 / 360.0


def hsv_planes(const unsigned char[:, :, :] rgb, int downscale=1):
    """Nearest-neighbor downscale, then RGB -> HSV as three uint8 planes."""
    cdef Py_ssize_t height = rgb.shape[0]
    cdef Py_ssize_t width = rgb.shape[1]
    if height == 0 or width == 0:
        raise ValueError("zero-sized frame")
    if rgb.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) RGB array")
    if downscale < 1:
        raise ValueError("downscale must be >= 1")

    cdef Py_ssize_t oh = (height + downscale - 1) // downscale
    cdef Py_ssize_t ow = (width + downscale - 1) // downscale
    out = np.empty((3, oh, ow), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] o = out

    cdef Py_ssize_t i, j, si, sj
    cdef double r, g, b, v, mn, delta, hue, sat
    for i in range(oh):
        si = i * downscale
        for j in range(ow):
            sj = j * downscale
            r = rgb[si, sj, 0]
            g = rgb[si, sj, 1]
            b = rgb[si, sj, 2]

            v = r
            if g > v:
                v = g
            if b > v:
                v = b
            mn = r
            if g < mn:
                mn = g
            if b < mn:
                mn = b
            delta = v - mn

            if delta == 0.0:
                hue = 0.0
            elif v == r:
                hue = 60.0 * ((g - b) / delta)
                if hue < 0.0:
                    hue = hue + 360.0
            elif v == g:
                hue = 60.0 * ((b - r) / delta + 2.0)
            else:
                hue = 60.0 * ((r - g) / delta + 4.0)

            if v == 0.0:
                sat = 0.0
            else:
                sat = floor((255.0 * delta) / v + 0.5)

            o[0, i, j] = <unsigned char> floor(hue * HUE_SCALE + 0.5)
            o[1, i, j] = <unsigned char> sat
            o[2, i, j] = <unsigned char> v
    return out


def mean_abs_diff(const unsigned char[:, :, ::1] a, const unsigned char[:, :, ::1] b):
    """Mean over channels of the per-pixel mean absolute difference."""
    if a.shape[0] != b.shape[0] or a.shape[1] != b.shape[1] or a.shape[2] != b.shape[2]:
        raise ValueError(
            f"shape mismatch: ({a.shape[0]}, {a.shape[1]}, {a.shape[2]})"
            f" vs ({b.shape[0]}, {b.shape[1]}, {b.shape[2]})"
        )
    cdef Py_ssize_t h = a.shape[1]
    cdef Py_ssize_t w = a.shape[2]
    cdef double n = <double> (h * w)
    cdef long long s0 = 0, s1 = 0, s2 = 0
    cdef int d
    cdef Py_ssize_t i, j
    for i in range(h):
        for j in range(w):
            d = <int> a[0, i, j] - <int> b[0, i, j]
            s0 += d if d >= 0 else -d
            d = <int> a[1, i, j] - <int> b[1, i, j]
            s1 += d if d >= 0 else -d
            d = <int> a[2, i, j] - <int> b[2, i, j]
            s2 += d if d >= 0 else -d
    cdef double m0 = (<double> s0) / n
    cdef double m1 = (<double> s1) / n
    cdef double m2 = (<double> s2) / n
    return (m0 + m1 + m2) / 3.0


def rgb_to_gray(const unsigned char[:, :, :] rgb):
    """8-bit luma plane: round(0.299 R + 0.587 G + 0.114 B) per pixel."""
    cdef Py_ssize_t height = rgb.shape[0]
    cdef Py_ssize_t width = rgb.shape[1]
    if height == 0 or width == 0:
        raise ValueError("zero-sized frame")
    if rgb.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) RGB array")
    out = np.empty((height, width), dtype=np.uint8)
    cdef unsigned char[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double y
    for i in range(height):
        for j in range(width):
            y = floor(0.299 * rgb[i, j, 0] + 0.587 * rgb[i, j, 1] + 0.114 * rgb[i, j, 2] + 0.5)
            if y > 255.0:
                y = 255.0
            o[i, j] = <unsigned char> y
    return out
