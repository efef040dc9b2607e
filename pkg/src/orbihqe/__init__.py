"""Exact algebra for the Hirota quadratic equations of the orbifold line with weights (n-2, 2, 2)."""

__version__ = "0.1.0"
