"""Build script: compiles the optional queue-simulation kernel.

The package is fully functional without the extension (a pure-Python kernel is
selected at import time), so any failure to cythonize or compile downgrades to
a plain build instead of aborting the install.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "ecomp._queue_kernel",
                ["src/ecomp/_queue_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    print(f"ecomp: skipping compiled kernel ({exc!r}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
