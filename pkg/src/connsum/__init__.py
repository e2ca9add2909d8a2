"""Exact computations with connected sums of modular operads."""

__version__ = "0.1.0"
