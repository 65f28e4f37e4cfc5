import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the accelerator extension if possible, otherwise fall back
    to the pure-Python kernels (higherlocal._kernel_py)."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernel build ({exc})")

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "pure-Python kernels will be used")


ext_modules = []
if os.environ.get("HIGHERLOCAL_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        ext_modules = cythonize(
            [Extension("higherlocal._core", ["src/higherlocal/_core.pyx"])],
            language_level=3,
        )
    except ImportError:
        print("warning: Cython not available; pure-Python kernels will be used")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
