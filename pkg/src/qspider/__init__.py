"""Exact symbolic engine for quantum sl(n) web and tangle diagrams."""

__version__ = "0.1.0"
