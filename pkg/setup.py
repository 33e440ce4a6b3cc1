"""Builds the optional Cython kernel extension.

The package works without it (pure-numpy fallback is selected at import),
but the SLAM sensor model and lidar raycasting are much faster compiled.
"""

from setuptools import setup, Extension

import numpy

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mbot_stack.kernels._core",
                ["src/mbot_stack/kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
