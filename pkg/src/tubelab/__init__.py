"""Numerical laboratory for Szegő-type kernels on the Grauert tube of the round 2-sphere."""

__version__ = "0.1.0"
