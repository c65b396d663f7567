"""Radial Schrodinger evolution for the weighted Bessel operator ``d_xx + (a/x) d_x``."""

__version__ = "0.1.0"
