"""Spectral simulation and operator-trace laboratory for a Hirota-type higher-order NLS equation."""

__version__ = "0.1.0"
