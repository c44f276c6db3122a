"""Build script: compiles the market-evaluation kernel when a C toolchain is
available and falls back to a source-only install otherwise.  The package
selects between the compiled kernel and the pure-Python twin at import time,
so a failed extension build only costs speed, never correctness."""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError


def extensions():
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "segmarket.kernels._compiled",
        ["src/segmarket/kernels/_compiled.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


class OptionalBuildExt(build_ext):
    """Degrade to the pure-Python kernel when compilation fails."""

    def run(self):
        try:
            super().run()
        except (CCompilerError, ExecError, PlatformError, FileNotFoundError) as exc:
            print(f"warning: extension build skipped ({exc}); "
                  "using pure-Python kernels", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError, FileNotFoundError) as exc:
            print(f"warning: {ext.name} not compiled ({exc}); "
                  "using pure-Python kernels", file=sys.stderr)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
