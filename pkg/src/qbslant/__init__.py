"""Numerical verification of quasi bi-slant submanifolds of flat complex space."""

__version__ = "0.1.0"
