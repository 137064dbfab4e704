"""Chained Hamiltonians: declarative systems, evaluation and phase-point sampling."""
