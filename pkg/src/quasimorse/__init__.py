"""Morse homology for discretized quasilinear elliptic energies."""

__version__ = "0.1.0"
