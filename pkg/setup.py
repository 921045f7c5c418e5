import sys

from setuptools import Extension, setup

# The compiled raster/fusion kernels are an optional speedup; the package
# falls back to the numpy implementation when the extension is missing.
# -ffp-contract=off keeps the float arithmetic identical to numpy's
# (no FMA contraction), so both backends produce bit-equal pixel sets.
try:
    from Cython.Build import cythonize

    if sys.platform == "win32":
        extra_args = []
    else:
        extra_args = ["-O3", "-ffp-contract=off"]
    ext_modules = cythonize(
        [
            Extension(
                "parsegait._kernels",
                ["src/parsegait/_kernels.pyx"],
                extra_compile_args=extra_args,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
