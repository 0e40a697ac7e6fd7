"""Builds the optional compiled raycast kernel.

The package works without it: gridhouse.render.kernel falls back to the
pure-Python implementation when the extension is missing or when
GRIDHOUSE_PURE_PYTHON=1 is set.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("GRIDHOUSE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext = Extension(
            "gridhouse.render._raycast",
            sources=["src/gridhouse/render/_raycast.pyx"],
        )
        ext.optional = True  # a failed build must not block installation
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        pass

setup(ext_modules=ext_modules)
