"""Build script: compiles the optional accelerator extension.

The package works without the extension (a pure-numpy fallback is selected
at import time), so any failure to build it is non-fatal.
"""
import os

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "fedsaddle.kernels._core",
        sources=["src/fedsaddle/kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off: the pure-numpy backend and the compiled backend
        # must execute the same IEEE op sequence per element; silent FMA
        # fusion would break the bit-level collapse guarantees within a run.
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    try:
        return cythonize([ext], language_level=3)
    except Exception:
        if os.environ.get("FEDSADDLE_REQUIRE_EXT"):
            raise
        return []


setup(ext_modules=_extensions())
