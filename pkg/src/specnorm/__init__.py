"""Spectral operators and L^p eigenfunction norms on regular graphs and the sphere."""

__version__ = "0.1.0"
