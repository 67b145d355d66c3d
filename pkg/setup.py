"""Build script: compiles the optional cyclic-tridiagonal kernel.

The package works without the extension (a numpy/scipy fallback is selected
at import time), so a missing compiler downgrades the install instead of
failing it.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "magrelax._kernels",
                ["src/magrelax/_kernels.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError as exc:  # pragma: no cover - only hit on broken toolchains
    import warnings

    warnings.warn(f"building without compiled kernels: {exc}")

setup(ext_modules=ext_modules)
