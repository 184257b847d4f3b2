"""Build the optional Cython kernel; the package falls back to pure Python without it."""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # no compiler toolchain: pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "banachrig._kernels",
                ["src/banachrig/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
