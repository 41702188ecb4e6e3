"""Build script for the optional compiled kernel extension.

The extension is a performance twin of chaosforge/_kernels/fallback.py;
the package works without it.  -ffp-contract=off keeps the float math
bit-identical to the fallback (no fused multiply-adds).
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "chaosforge._kernels._fastcore",
                sources=["src/chaosforge/_kernels/_fastcore.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
