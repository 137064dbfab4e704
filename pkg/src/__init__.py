"""Superint Workbench - numerical verification of superintegrable chained Hamiltonians."""

__version__ = "1.0.0"
