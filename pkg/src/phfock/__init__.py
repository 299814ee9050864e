"""Numerical toolkit for Toeplitz operators on the pluriharmonic Fock space."""

__version__ = "0.1.0"
