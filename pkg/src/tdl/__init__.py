"""Exact finite-field counts and Monte Carlo checks around eigenvalue 1 in mod-ell image groups."""

__version__ = "0.1.0"
