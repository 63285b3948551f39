"""Potential games whose equilibria encode the end of a line."""

__version__ = "0.1.0"
