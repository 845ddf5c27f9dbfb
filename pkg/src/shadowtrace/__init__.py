"""Exact traces in bicategories with shadows, and the fixed-point invariants built from them."""

__version__ = "0.1.0"
