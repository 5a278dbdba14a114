""" setup """
import io

from setuptools import find_packages
from setuptools import setup

with io.open("README.md", "rt", encoding="utf8") as f:
    LONG_DESC = f.read()

VERSION = "0.1.0"

# This call to setup() does all the work
setup(
    name="multigraphy",
    version=VERSION,
    description=(
        "Multigraph signal processing: diffusion trees, multigraph filters,"
        " joint block diagonalization and multigraph neural networks."
    ),
    long_description=LONG_DESC,
    long_description_content_type="text/markdown",
    license="MIT",
    classifiers=[
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
    ],
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22",
        "pandas>=1.4",
        "scipy>=1.8",
        "scikit-learn>=1.0",
        # add contents from requirements.txt only
    ],
    entry_points={"console_scripts": ["msp=multigraphy.cli:main"]},
)
