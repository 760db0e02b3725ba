from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "fjlt._fwht_cy",
        ["src/fjlt/_fwht_cy.pyx"],
        extra_compile_args=["-O3"],
    ),
]

setup(ext_modules=cythonize(extensions, language_level="3"))
