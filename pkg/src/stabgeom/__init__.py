"""Stabilization diagnostics for Poisson functionals."""

__version__ = "0.1.0"
