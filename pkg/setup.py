"""Optional Cython build of the term kernel.

``src/syncrw/_kernel.py`` is compiled unchanged as ``syncrw._ckernel``.
Without Cython or a C compiler the package installs pure Python only.
"""

import os
import shutil

from setuptools import setup
from setuptools.command.build_ext import build_ext

HERE = os.path.dirname(os.path.abspath(__file__))
SRC = os.path.join(HERE, "src", "syncrw", "_kernel.py")
GEN = os.path.join(HERE, "build", "cy", "syncrw", "_ckernel.py")


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as e:  # noqa: BLE001
            self.announce(f"skipping the compiled kernel: {e}", level=3)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as e:  # noqa: BLE001
            self.announce(f"skipping {ext.name}: {e}", level=3)


def extensions():
    if os.environ.get("SYNCRW_PURE"):
        return []
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    os.makedirs(os.path.dirname(GEN), exist_ok=True)
    shutil.copyfile(SRC, GEN)
    ext = Extension("syncrw._ckernel", [os.path.relpath(GEN, HERE)])
    return cythonize([ext], language_level=3, quiet=True,
                     compiler_directives={"binding": False})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
