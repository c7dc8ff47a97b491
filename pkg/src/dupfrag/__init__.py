"""Duplication/substitution dynamics of supermaximal repeat lengths."""

__version__ = "0.1.0"
