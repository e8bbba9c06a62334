import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernel module is optional: when the build fails or the
# extension is absent at runtime, the package falls back to the pure-Python
# twin in smoclust._pure.  -ffp-contract=off keeps the C arithmetic
# bit-identical to the Python fallback (no FMA fusion).
ext = Extension(
    "smoclust._speed",
    ["src/smoclust/_speed.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O2", "-ffp-contract=off"],
    optional=True,
)

setup(ext_modules=cythonize([ext], language_level="3"))
