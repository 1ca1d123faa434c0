"""Streaming testbed for planted-structure detection problems."""

__version__ = "0.1.0"
