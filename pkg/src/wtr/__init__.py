"""Topological recursion on the Weierstrass curve."""

__version__ = "0.1.0"
