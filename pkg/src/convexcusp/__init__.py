"""Hilbert geometry of model convex projective cusps and the explicit
figure-eight holonomy family, with exact-rational verification tools."""

__version__ = "0.1.0"
