import glob
import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup


def eigen_include():
    for candidate in ("/usr/include/eigen3", "/usr/local/include/eigen3"):
        if os.path.isdir(candidate):
            return candidate
    raise RuntimeError("Eigen headers not found; install libeigen3-dev")


sources = sorted(
    glob.glob("src/**/*.cpp", recursive=True) + ["bindings/py_module.cpp"]
)

ext = Pybind11Extension(
    "perg2p._core",
    sources,
    include_dirs=["include", "vendor", eigen_include()],
    define_macros=[("EIGEN_DONT_PARALLELIZE", None)],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
