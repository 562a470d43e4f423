"""Exact constructions and certificates for lattice-free simplices of large lattice width."""

__version__ = "0.1.0"
