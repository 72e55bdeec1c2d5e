#!/usr/bin/env python3
"""Times the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--frames N] [--size WxH]

Simulates the scene-scoring scan (HSV conversion + content score per frame)
and the per-crop luma conversion, the two per-pixel loops that dominate a
long-video run.
"""

import argparse
import time

import numpy as np

from annotheia.kernels import reference

try:
    from annotheia.kernels import _native
except ImportError:
    _native = None


def time_scan(mod, frames, downscale):
    start = time.perf_counter()
    prev = None
    sink = 0.0
    for frame in frames:
        planes = np.asarray(mod.hsv_planes(frame, downscale))
        if prev is not None:
            sink += mod.mean_abs_diff(prev, planes)
        prev = planes
    return time.perf_counter() - start, sink


def time_gray(mod, frames):
    start = time.perf_counter()
    for frame in frames:
        mod.rgb_to_gray(frame)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--frames", type=int, default=50)
    parser.add_argument("--size", default="1280x720")
    parser.add_argument("--downscale", type=int, default=4)
    args = parser.parse_args()
    width, height = (int(x) for x in args.size.split("x"))

    rng = np.random.default_rng(0)
    frames = [rng.integers(0, 256, (height, width, 3), dtype=np.uint8)
              for _ in range(args.frames)]

    print(f"{args.frames} frames of {width}x{height}, downscale {args.downscale}")
    rows = []
    py_scan, py_sink = time_scan(reference, frames, args.downscale)
    py_gray = time_gray(reference, frames)
    rows.append(("numpy fallback", py_scan, py_gray))
    if _native is not None:
        nat_scan, nat_sink = time_scan(_native, frames, args.downscale)
        nat_gray = time_gray(_native, frames)
        assert abs(py_sink - nat_sink) < 1e-9, "kernel outputs diverged"
        rows.append(("cython native", nat_scan, nat_gray))
    else:
        print("compiled extension not available; showing fallback only")

    print(f"{'backend':<16} {'scene scan':>12} {'fps':>8} {'gray':>12} {'fps':>8}")
    for name, scan, gray in rows:
        print(f"{name:<16} {scan:>10.3f} s {args.frames / scan:>8.1f} "
              f"{gray:>10.3f} s {args.frames / gray:>8.1f}")
    if _native is not None:
        print(f"speedup: scene scan {py_scan / nat_scan:.2f}x, "
              f"gray {py_gray / nat_gray:.2f}x")


if __name__ == "__main__":
    main()
