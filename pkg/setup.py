import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # No Cython at build time: install pure-Python only; the package falls
    # back to the numpy reference kernels at import.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "rank1stab._kernels._core",
                ["src/rank1stab/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
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
