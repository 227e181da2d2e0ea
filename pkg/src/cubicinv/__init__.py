"""Exact invariants, curvature and coefficient positivity for ternary cubics."""

__version__ = "0.1.0"
