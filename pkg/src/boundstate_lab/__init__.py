"""Composite-particle second quantization laboratory."""

__version__ = "0.1.0"
