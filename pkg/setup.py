"""Build the optional compiled kernel; the package falls back to pure Python without it."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("INFOPLAN_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("infoplan.kernels._fast", ["src/infoplan/kernels/_fast.pyx"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
