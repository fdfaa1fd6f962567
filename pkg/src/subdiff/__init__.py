"""Fundamental solution, mild solutions and decay-rate verification for the
Caputo time-fractional heat equation on R^N, N = 1, 2, 3."""

__version__ = "0.1.0"
