# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


import re
try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup


mrkitversion = re.search(
    r"^__version__\s*=\s*'(.*)'",
    open('mrkit/main.py').read(),
    re.M
    ).group(1)
assert mrkitversion


setup(
    name = "mrkit",
    packages = ["mrkit"],
    entry_points = {
        "console_scripts": ["mrkit = mrkit.main:main"]
        },
    version = mrkitversion,
    description = ("Exact series for the AKNS matrix resolvent, wave "
        "functions and k-point correlators."),
    long_description=open("README.rst", "rb").read().decode('utf-8'),
    author = "The mrkit authors",
    keywords = ["integrable systems", "AKNS", "matrix resolvent",
        "tau function", "power series", "exact arithmetic"],
    platforms = ["POSIX", "Windows"],
    classifiers = [
        "Programming Language :: Python",
        "Development Status :: 4 - Beta",
        "License :: OSI Approved :: MIT License",
        "Operating System :: POSIX",
        "Operating System :: Microsoft :: Windows",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Scientific/Engineering :: Physics",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        ],
    )
