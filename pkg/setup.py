"""Builds the optional compiled SSA kernels; the package works without them."""
from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    pass
else:
    ext_modules = cythonize(
        [
            Extension(
                "ctmcreduce.ssa._kernels",
                ["src/ctmcreduce/ssa/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math: results must match the Python kernels bit for bit
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
