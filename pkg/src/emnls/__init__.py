"""emnls: ground states, potentials, functionals and dynamics for focusing emNLS."""

__version__ = "0.1.0"
