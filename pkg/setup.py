# Builds the optional compiled kernel core.  The package works without it:
# angioseg._backend falls back to the pure numpy/scipy kernels at import.
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "angioseg._kernels",
        sources=["src/angioseg/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps float results identical to the numpy
        # fallback (no fused multiply-add in distance computations).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level="3") if cythonize else [],
)
