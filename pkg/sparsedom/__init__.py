"""Sparse domination of dyadic operators: decompositions, shifts, weights and two-weight checks."""
__version__ = "0.1.0"
