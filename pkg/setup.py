import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the numpy kernels at import time
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("fixscope._ckernels", ["src/fixscope/_ckernels.pyx"],
                   include_dirs=[np.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                   extra_compile_args=["-O3"],
                   optional=True)],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
