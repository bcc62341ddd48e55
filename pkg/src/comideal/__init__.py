"""Finite-scale verification toolkit for commutator subspaces of operator ideals."""

__version__ = "0.1.0"
