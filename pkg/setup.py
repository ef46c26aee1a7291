"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension; `taskcurve._kernels`
falls back to a NumPy/pure-Python implementation of the same interface when
the compiled module is absent.  Building it just makes the Monte Carlo and
bootstrap paths several times faster.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "taskcurve._kernels._core",
                sources=["src/taskcurve/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:
    sys.stderr.write(
        "taskcurve: Cython or NumPy unavailable (%s); "
        "installing without the compiled kernels.\n" % exc
    )

setup(ext_modules=ext_modules)
