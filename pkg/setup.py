import os

from setuptools import Extension, setup


def extensions():
    # The compiled kernels are optional: the package falls back to the
    # pure-numpy implementations when the extension is missing.
    if not os.path.exists("src/paraproduct_kit/_kernels_cy.pyx"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "paraproduct_kit._kernels_cy",
                ["src/paraproduct_kit/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions())
