"""Quantum and classical dynamics of two kicked coupled spins."""

__version__ = "0.1.0"
