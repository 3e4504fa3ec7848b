"""Build script for the compiled kernel extension.

The extension is optional: if Cython or a C compiler is unavailable the
install still succeeds and the package falls back to the NumPy kernels at
import time (see dirlap.backends).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "dirlap._kernels_cy",
                ["src/dirlap/_kernels_cy.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
