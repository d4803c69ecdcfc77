"""Spherical-harmonic rotation coefficients for large degrees."""

__version__ = "0.1.0"
