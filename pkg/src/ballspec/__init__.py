"""Spectral tensor calculus in the unit ball with Jacobi-polynomial bases."""

__version__ = "0.1.0"
