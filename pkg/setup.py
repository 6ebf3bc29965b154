"""Build script for the optional compiled fusion kernel.

The package is fully functional without the extension: fpc.fusion falls back
to the pure-Python kernel at import time. Set FPC_NO_EXT=1 to skip the build
entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError

_BUILD_ERRORS = (CCompilerError, ExecError, PlatformError, FileNotFoundError)


class OptionalBuildExt(build_ext):
    """Treat extension build failures as non-fatal."""

    def run(self):
        try:
            super().run()
        except _BUILD_ERRORS as exc:
            print(f"skipping compiled kernel ({exc}); pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except _BUILD_ERRORS as exc:
            print(f"skipping {ext.name} ({exc}); pure-Python fallback will be used")


ext_modules = []
if not os.environ.get("FPC_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("fpc._fusion_cy", ["src/fpc/_fusion_cy.pyx"])],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
