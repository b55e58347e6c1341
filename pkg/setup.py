#!/usr/bin/env python3

from setuptools import find_packages, setup

setup_args = dict()

if __name__ == "__main__":
    setup(**setup_args)