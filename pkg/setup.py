import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

_np_random_lib = os.path.join(os.path.dirname(np.__file__), "random", "lib")

extensions = [
    Extension(
        "fundmaint.montecarlo._engine_cython",
        ["src/fundmaint/montecarlo/_engine_cython.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[_np_random_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps the compiled lane bit-compatible with the
        # numpy lane (no fused multiply-adds in the step arithmetic).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

if cythonize is not None:
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
else:
    # No Cython available: install the pure-Python lane only.  The package
    # selects the numpy fallback at import time when the extension is missing.
    ext_modules = []

setup(ext_modules=ext_modules)
