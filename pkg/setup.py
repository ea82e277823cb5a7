import os
import platform
import sys

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy fallback is used
    cythonize = None

compile_args = ["-O3"]
libraries = []
if sys.platform.startswith("linux") and platform.machine() in ("x86_64", "AMD64"):
    # compile-only fast-math lets gcc call glibc's vector exp/tanh (libmvec);
    # the link step stays IEEE so no FTZ/DAZ startup code is pulled in
    compile_args += ["-ffast-math", "-fopenmp-simd", "-march=native"]
    libraries = ["mvec", "m"]

extensions = []
if cythonize is not None and not os.environ.get("AQUACAST_NO_EXT"):
    extensions = cythonize(
        [
            Extension(
                "aquacast.nn._gru_ext",
                ["src/aquacast/nn/_gru_ext.pyx"],
                include_dirs=[np.get_include(), "src/aquacast/nn"],
                extra_compile_args=compile_args,
                libraries=libraries,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
