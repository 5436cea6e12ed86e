"""Sampling-cost models and variance-reduction strategies for QKSD."""

__version__ = "0.1.0"
