"""Naive mean-field approximation for Potts and Ising models on weighted graphs."""
__version__ = "0.1.0"
