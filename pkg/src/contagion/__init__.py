"""Interaction-driven contagion over temporal contact networks."""

__version__ = "0.1.0"
