"""Exact transfer functions and squeezing observables of chirped-grating parametric down-conversion."""

__version__ = "0.1.0"
