"""Skew-product minimal flows over the dyadic odometer with circle fibers."""

__version__ = "0.1.0"
