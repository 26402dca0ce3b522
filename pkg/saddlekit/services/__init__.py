"""Numerical services: sparse kernels, systems, generators, preconditioners, solvers."""
