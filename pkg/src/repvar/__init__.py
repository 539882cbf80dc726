"""Numerical toolkit for surface-group representation varieties and their momentum geometry."""

__version__ = "0.1.0"
