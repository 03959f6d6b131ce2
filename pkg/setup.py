"""Build hook for the optional compiled kernels.

The package works without a C compiler: when Cython or numpy headers are
missing at build time the extension is skipped and ``dynoracle._kernels``
falls back to the numpy implementation at import.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("DYNORACLE_NO_EXT", "") != "1":
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
                    "dynoracle._kernels._ckernels",
                    ["src/dynoracle/_kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no FMA contraction: the PDGM / GD-oracle loops must
                    # stay bit-identical to each other
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
