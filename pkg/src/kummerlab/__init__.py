"""Numerical laboratory for genus-2 Jacobians, their Kummer models and Coble duality."""

__version__ = "0.1.0"
