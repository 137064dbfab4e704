"""Trajectory integration and conservation drift."""

from .integrator import Trajectory, drift_report, integrate

__all__ = ["Trajectory", "drift_report", "integrate"]
