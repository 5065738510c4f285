#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import io
import os

from setuptools import find_packages, setup

# Package meta-data.
NAME = "hhx"
DESCRIPTION = (
    "Helmholtz decompositions, local zero-mean checks and Maxwell constants on voxel "
    "domains."
)
KEYWORDS = "helmholtz decomposition maxwell constants poincare friedrichs voxel"
REQUIRES_PYTHON = ">=3.8.0"

REQUIRED = [
    "joblib>=1.3",
    "matplotlib",
    "numpy",
    "pydantic>=2",
    "scipy>=1.8",
    "tqdm",
]

EXTRAS = {
    "dev": [
        "autoflake",
        "black",
        "flake8",
        "isort",
        "mkdocs",
        "mkdocs-material",
        "markdown-include",
        "mkdocstrings",
        "pytest",
    ],
}

here = os.path.abspath(os.path.dirname(__file__))

try:
    with io.open(os.path.join(here, "README.md"), encoding="utf-8") as f:
        long_description = "\n" + f.read()
except FileNotFoundError:
    long_description = DESCRIPTION

# Load the package's __version__.py module as a dictionary.
about = {}
with open(os.path.join(here, NAME, "__version__.py")) as f:
    exec(f.read(), about)

setup(
    name=NAME,
    version=about["__version__"],
    description=DESCRIPTION,
    keywords=KEYWORDS,
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires=REQUIRES_PYTHON,
    packages=find_packages(exclude=["tests", "*.tests", "*.tests.*", "tests.*"]),
    install_requires=REQUIRED,
    extras_require=EXTRAS,
    entry_points={"console_scripts": ["hhx = hhx.cli.main:main"]},
    include_package_data=True,
    license="AGPLv3",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: GNU Affero General Public License v3 or later "
        "(AGPLv3+)",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Education",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Scientific/Engineering :: Physics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
)
