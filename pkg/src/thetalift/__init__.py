"""Regularized theta lifts over totally real fields: lattices, Weil representations, theta series,
Whittaker forms and automorphic Green functions."""

__version__ = "0.1.0"
