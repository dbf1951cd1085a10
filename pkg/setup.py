"""Build the optional Cython stepping kernel.

The package runs without it; ``vertexlogic.engine`` falls back to a numpy
implementation when ``vertexlogic._kernel`` cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("VERTEXLOGIC_NO_EXT") != "1":
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
                    "vertexlogic._kernel",
                    ["src/vertexlogic/_kernel.pyx"],
                    include_dirs=[np.get_include()],
                    # keep IEEE semantics so both backends agree bit for bit
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
