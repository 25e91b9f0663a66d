"""Desk-scale formality style transfer toolkit."""

__version__ = "0.1.0"
