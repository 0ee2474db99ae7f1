"""Executable restriction-category geometry on finite models."""

__version__ = "0.1.0"
