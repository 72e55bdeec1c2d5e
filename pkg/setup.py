"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a missing compiler or Cython must not break installation.
Set ANNOTHEIA_NO_EXTENSION=1 to skip the build explicitly.
"""

import os

from setuptools import Extension, setup


def extension_modules():
    if os.environ.get("ANNOTHEIA_NO_EXTENSION") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "annotheia.kernels._native",
        sources=["src/annotheia/kernels/_native.pyx"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extension_modules())
