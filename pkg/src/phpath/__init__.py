"""PH quintic spline paths and robust path following."""

__version__ = "0.1.0"
