"""Measure how model accuracy affects the stability of feature-importance rankings."""

__version__ = "0.1.0"
