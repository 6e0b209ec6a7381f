"""Spectral analysis of shear flows under Coriolis force."""

__version__ = "0.1.0"
