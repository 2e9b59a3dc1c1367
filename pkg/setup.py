"""Optional Cython build of the assembly kernel; the package works without it."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CURVEFLOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("curveflow._kernels", ["src/curveflow/_kernels.pyx"], include_dirs=[numpy.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
