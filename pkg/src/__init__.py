"""Obstacle SPDE lab - stochastic obstacle problems with p-Laplacian drift."""

__version__ = "0.1.0"
