"""Build script.  The compiled graph kernels are optional: if Cython (or a C
compiler) is unavailable the package installs with the pure-Python fallback."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/permeq/_fastgraph.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"NOTE: building without compiled kernels ({exc!r})")

setup(ext_modules=ext_modules)
