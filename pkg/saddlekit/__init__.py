"""Shift-splitting solvers and preconditioners for generalized saddle point systems."""

__version__ = "0.1.0"
