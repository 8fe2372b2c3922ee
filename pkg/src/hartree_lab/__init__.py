"""Numerical lab for the slightly subcritical Hartree problem on balls."""

__version__ = "0.1.0"
