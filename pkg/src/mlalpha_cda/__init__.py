"""Pseudo-spectral modified Leray-alpha solver with continuous data assimilation."""

__version__ = "0.1.0"
