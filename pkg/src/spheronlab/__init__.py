"""Spectral, membrane, pairing, Thomas-Fermi and RP^2 geodesic models."""
__version__ = "0.1.0"
