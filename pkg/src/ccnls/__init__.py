"""Pseudospectral simulator and numerical lab for a quadratic-derivative Schrodinger system."""

__version__ = "0.1.0"
