"""Symbolic workbench for deformation theory computations."""

__version__ = "0.1.0"
