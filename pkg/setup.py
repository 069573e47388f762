"""Library for packaging the project."""

from setuptools import setup

setup()
