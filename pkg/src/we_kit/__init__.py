"""Curvature algebra and weakly Einstein checks for Kahler surfaces."""

__version__ = "0.1.0"
