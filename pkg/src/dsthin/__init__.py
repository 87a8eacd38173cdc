"""Analytic synthesis and analysis of planar arrays thinned by 2D difference sets."""

__version__ = "0.1.0"
