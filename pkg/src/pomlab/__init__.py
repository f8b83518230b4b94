"""Numerical laboratory for the n-bit parity-oblivious multiplexing game."""

__version__ = "0.1.0"
