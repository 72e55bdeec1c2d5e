"""Per-pixel kernels with a compiled fast path.

Importing this package selects the compiled Cython extension when it is
available and falls back to the numpy reference otherwise. Both paths are
bit-identical; `BACKEND` records which one is active. Set
ANNOTHEIA_PURE_PYTHON=1 to force the fallback (used by the benchmark).
"""

import os

from annotheia.kernels import reference

BACKEND = "python"
hsv_planes = reference.hsv_planes
mean_abs_diff = reference.mean_abs_diff
rgb_to_gray = reference.rgb_to_gray

if os.environ.get("ANNOTHEIA_PURE_PYTHON") != "1":
    try:
        from annotheia.kernels import _native

        hsv_planes = _native.hsv_planes
        mean_abs_diff = _native.mean_abs_diff
        rgb_to_gray = _native.rgb_to_gray
        BACKEND = "native"
    except ImportError:
        pass

__all__ = ["BACKEND", "hsv_planes", "mean_abs_diff", "rgb_to_gray", "reference"]
