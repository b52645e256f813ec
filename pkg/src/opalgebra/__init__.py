"""Symbolic computation in free associative algebras with linear operators."""

__version__ = "0.1.0"
