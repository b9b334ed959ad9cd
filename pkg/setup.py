"""Build script: compiles the optional Cython kernels.

The package works without the extension (a NumPy/pure-Python fallback is
selected at import time), so any failure here is non-fatal by design:
install with EQUIWAVE_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("EQUIWAVE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("equiwave._kernels._core",
                       ["src/equiwave/_kernels/_core.pyx"])],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
        for ext in ext_modules:
            ext.include_dirs.append(numpy.get_include())
    except ImportError:
        pass

setup(ext_modules=ext_modules)
