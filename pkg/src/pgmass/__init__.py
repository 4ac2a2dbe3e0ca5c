"""Heuristic masses of pro-p Galois groups with prescribed ramification type."""

__version__ = "0.1.0"
