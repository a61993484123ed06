"""Combinatorial Regge calculus on triangulated closed 3-manifolds."""

__version__ = "0.1.0"
