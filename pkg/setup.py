"""Build script for the optional compiled hypervolume kernel.

The package is pure Python except for protonas.hvss._hv_cy, a Cython
translation of the exact hypervolume routine.  If Cython or a C compiler
is unavailable the extension is simply skipped; protonas.hvss falls back
to the pure-Python kernel at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    # A failed compile must not make the whole install fail.
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: skipping compiled hypervolume kernel ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: skipping {ext.name} ({exc})")


try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "protonas.hvss._hv_cy",
                ["src/protonas/hvss/_hv_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:  # pragma: no cover - toolchain dependent
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
