"""Exact laboratory for heights, dynamical and arithmetic degrees over Q."""

__version__ = "0.1.0"
