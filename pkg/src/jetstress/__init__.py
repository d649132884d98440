"""Coordinate calculus of k-jet hyper-stresses."""

__version__ = "0.1.0"
