#!/usr/bin/env python3
"""
setup.py for gammanano - gamma-photon phase-modulation messaging simulator
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read the README file
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

setup(
    name="gammanano",
    version="0.1.0",
    description="Gamma-photon phase-modulation messaging simulator",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="Rustem",
    author_email="r.kamun@gmail.com",
    packages=find_packages(include=["gammanano", "gammanano.*"]),
    package_data={"gammanano": ["examples/*.json"]},
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.11",
        "pydantic>=2.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0",
            "black>=22.0",
            "flake8>=4.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "gammanano=gammanano.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    keywords="mossbauer gamma-ray phase-modulation monte-carlo tcspc simulation",
)
