"""Build the optional Cython kernels.

A failed compile is not fatal: the package falls back to the numpy
kernels at import time.
"""
import platform

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using numpy fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    flags = ["-O3"]
    if platform.machine().lower() in ("x86_64", "amd64"):
        # hardware popcount; without it the builtin is a library call
        flags.append("-mpopcnt")
    ext = Extension("mcsunflower._ckernels", ["src/mcsunflower/_ckernels.pyx"],
                    extra_compile_args=flags)
    return cythonize([ext], compiler_directives={"language_level": "3"}, quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
