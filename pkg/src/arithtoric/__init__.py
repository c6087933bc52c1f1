"""Exceptional collections, Galois descent and lattice cohomology on A_n toric varieties."""

__version__ = "0.1.0"
