"""Rank-two Poisson structures for reduced non-holonomic systems."""
__version__ = "0.1.0"
