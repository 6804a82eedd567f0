"""Localized kernels, cubature, tight frames and approximation on double conic domains."""

__version__ = "0.1.0"
