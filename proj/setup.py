"""Wheel build for the pcicorr python package.

The extension module is produced by the project's own CMake build; this
file only teaches setuptools to invoke it and to collect the resulting
shared object into the wheel.  Build with ``pip install --no-build-isolation .``
(cmake, a C++20 compiler, Eigen, and pybind11 must be available).
"""

import os
import subprocess
import sys
from pathlib import Path

import pybind11
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DPCICORR_WHEEL=ON",
                f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={out_dir}",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPython_EXECUTABLE={sys.executable}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            [
                "cmake",
                "--build", str(build_dir),
                "--target", "_pcicorr",
                "-j", str(os.cpu_count() or 2),
            ],
            check=True,
        )


setup(
    packages=["pcicorr"],
    package_dir={"pcicorr": "python/pcicorr"},
    ext_modules=[CMakeExtension("pcicorr._pcicorr")],
    cmdclass={"build_ext": CMakeBuild},
)
