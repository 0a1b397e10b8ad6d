from setuptools import Extension, setup

# The compiled assembly kernel is optional: without Cython (or a C compiler)
# the package installs pure-Python and latticeband.kernels falls back to the
# numpy implementation at import time.
ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "latticeband._kernels",
                ["src/latticeband/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    import warnings

    warnings.warn("Cython/numpy unavailable; building without the compiled kernel")

setup(ext_modules=ext_modules)
