"""Build hooks for the optional compiled kernel backend.

The package is pure Python plus one Cython extension
(``odeident._kernels._cy``).  If Cython or a C compiler is unavailable the
extension is skipped and the package falls back to the pure-Python kernels
at import time, so installation never hard-fails on the toolchain.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "odeident._kernels._cy",
        sources=["src/odeident/_kernels/_cy.pyx"],
    )
    return cythonize([ext], language_level="3")


class optional_build_ext(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: compiled kernels skipped ({exc}); "
                  "using pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "using pure-Python backend")


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
