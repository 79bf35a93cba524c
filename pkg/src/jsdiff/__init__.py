"""Discrete Jenkins-Strebel extremal problems on combinatorial surfaces."""

__version__ = "0.1.0"
