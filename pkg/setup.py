import os

from setuptools import Extension, setup

# The compiled kernel is an optional speedup; the package falls back to the
# pure-Python disciplines when the extension is absent (AQMSIM_PURE=1 skips
# the build entirely, e.g. for testing the fallback path).
ext_modules = []
if not os.environ.get("AQMSIM_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "aqmsim.aqm._kernel",
                    ["src/aqmsim/aqm/_kernel.pyx"],
                    # -ffp-contract=off: keep float ops bit-identical with the
                    # pure-Python backend (no FMA contraction).
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
