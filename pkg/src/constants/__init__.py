"""Polynomial constants of motion built from hyperbolic pairs."""

from .pairs import HypPair, compose, hyp_mul, hyp_pow, level_pairs
from .poly import PolyConstant, angle_brackets, degree_probe, poly_constant, poly_constants

__all__ = [
    "HypPair",
    "PolyConstant",
    "angle_brackets",
    "compose",
    "degree_probe",
    "hyp_mul",
    "hyp_pow",
    "level_pairs",
    "poly_constant",
    "poly_constants",
]
