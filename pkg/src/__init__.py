"""Majority sentiment detection over Ising-prior networks."""

__version__ = "0.1.0"
