"""Exact computations for Schottky deformations of degenerate curves and
Virasoro conformal blocks glued along pants decompositions."""

__version__ = "0.1.0"
