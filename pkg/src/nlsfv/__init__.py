"""Finite-volume simulation of the damped defocusing nonlinear Schrodinger equation."""

__version__ = "0.1.0"
