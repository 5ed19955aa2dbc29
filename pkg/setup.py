"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a failed compile only costs speed. Set
BSRELAY_PURE_PYTHON=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            print(f"bsrelay: skipping compiled kernels ({exc}); "
                  "the pure-numpy fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"bsrelay: failed to build {ext.name} ({exc}); "
                  "the pure-numpy fallback will be used")


ext_modules = []
cmdclass = {}
if not os.environ.get("BSRELAY_PURE_PYTHON"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "bsrelay._kernels._fastkern",
                    ["src/bsrelay/_kernels/_fastkern.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass = {"build_ext": OptionalBuildExt}
    except ImportError as exc:
        print(f"bsrelay: Cython/numpy unavailable at build time ({exc}); "
              "building without compiled kernels")

setup(ext_modules=ext_modules, cmdclass=cmdclass)
