"""Harmonic analysis on affine fractals and wavelet filters."""

__version__ = "0.1.0"
