"""Builds the optional compiled Monte Carlo kernels; the package works without them."""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("TIERCACHE_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("Cython or numpy unavailable: installing the pure-Python kernels only", file=sys.stderr)
    else:
        if sys.platform.startswith("win"):
            cargs, largs = ["/O2", "/openmp"], []
        else:
            cargs, largs = ["-O3", "-fopenmp"], ["-fopenmp"]
        ext_modules = cythonize(
            [
                Extension(
                    "tiercache.mc._kernels",
                    ["src/tiercache/mc/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=cargs,
                    extra_link_args=largs,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
