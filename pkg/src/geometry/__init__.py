"""Curvature of the kinetic metric and conformal-flatness verdicts."""

from .curvature import CurvatureReport, MetricJet, curvature, flatness_verdict, metric_jet

__all__ = ["CurvatureReport", "MetricJet", "curvature", "flatness_verdict", "metric_jet"]
