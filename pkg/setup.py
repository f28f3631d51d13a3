"""Build script for the compiled kernel extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time), so a missing Cython toolchain
degrades to a source-only install instead of failing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "multitime._kernels._slaz_cy",
                ["src/multitime/_kernels/_slaz_cy.pyx"],
                # -ffp-contract=off keeps the C arithmetic bit-identical to
                # the pure-Python fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
