"""Tests for polynomial constants and the degree probe."""

import numpy as np
import pytest

from src.autodiff.bracket import chain_observable, normalized_bracket
from src.chain.hamiltonian import chain_values
from src.chain.sampling import sample_points
from src.constants.poly import (
    angle_brackets,
    constant_parts,
    degree_probe,
    numerator_observable,
    poly_constant,
    poly_constants,
    raw_observable,
    reduced_observable,
)


class TestConstantsCommuteWithH:
    """Tests that the level constants are conserved."""

    @pytest.mark.parametrize("level", [1, 2])
    def test_oscillator3d(self, oscillator3d, points3d, level):
        """Test {H, sinh X} ≈ 0 and {H, numerator} ≈ 0."""
        h = chain_observable(oscillator3d, 1)
        for x in points3d[:4]:
            assert normalized_bracket(h, raw_observable(oscillator3d, level), x) <= 1e-8
            assert normalized_bracket(h, numerator_observable(oscillator3d, level), x) <= 1e-8

    @pytest.mark.parametrize("level", [1, 2])
    def test_kepler3d(self, kepler3d_k1, level):
        h = chain_observable(kepler3d_k1, 1)
        for x in sample_points(kepler3d_k1, 4, seed=8):
            assert normalized_bracket(h, reduced_observable(kepler3d_k1, level), x) <= 1e-8

    @pytest.mark.parametrize("level", [1, 2, 3])
    def test_four_d(self, four_d, points4d, level):
        h = chain_observable(four_d, 1)
        for x in points4d[:3]:
            assert normalized_bracket(h, reduced_observable(four_d, level), x) <= 1e-8


class TestConstantParts:
    """Tests for the assembled constant."""

    def test_raw_is_numerator_over_denominator(self, oscillator3d_k1, points3d):
        x = points3d[1]
        parts = constant_parts(oscillator3d_k1, x.q, x.p, 1)

        assert complex(parts.raw) == pytest.approx(complex(parts.numerator) / complex(parts.denominator))

    def test_raw_on_hyperbola(self, oscillator3d_k1, points3d):
        """Test cosh² − sinh² = 1 for the composed combination."""
        x = points3d[2]
        parts = constant_parts(oscillator3d_k1, x.q, x.p, 2)

        assert complex(parts.cosh) ** 2 - complex(parts.raw) ** 2 == pytest.approx(1.0, abs=1e-8)

    def test_poly_constants_labels(self, four_d, points4d):
        constants = poly_constants(four_d, points4d[0], measure=False)

        assert [c.label for c in constants] == ["L''1", "L''2", "L''3"]
        assert [c.angle_combo for c in constants] == [(1, 2), (2, 1), (1, 1)]
        assert all(c.measured_degree is None for c in constants)


class TestDegreeProbe:
    """Tests for the momentum-degree probe."""

    def test_quadratic(self, oscillator3d, points3d):
        """Test that L3 is quadratic in the momenta."""
        l3 = chain_observable(oscillator3d, 3)

        assert degree_probe(l3, points3d[0].q) == 2

    def test_product(self, oscillator3d, points3d):
        """Test that H·L2 has degree 4."""

        def f(q, p):
            values = chain_values(oscillator3d, q, p)
            return values[0] * values[1]

        assert degree_probe(f, points3d[0].q) == 4

    def test_constant_function(self, points3d):
        assert degree_probe(lambda q, p: 3.0, points3d[0].q) == 0

    def test_non_polynomial_is_none(self, points3d):
        """Test that exp-like growth exceeds any small dmax."""
        assert degree_probe(lambda q, p: np.exp(p[0]), points3d[0].q, dmax=6) is None

    def test_dmax_range(self, points3d):
        with pytest.raises(ValueError, match="dmax"):
            degree_probe(lambda q, p: 1.0, points3d[0].q, dmax=17)


class TestReducedDegrees:
    """Tests for the degrees of the reduced constants."""

    def test_oscillator3d_k1(self, oscillator3d_k1, points3d):
        constants = poly_constants(oscillator3d_k1, points3d[0])

        assert [c.measured_degree for c in constants] == [3, 3]

    def test_kepler3d_k1(self, kepler3d_k1, points3d):
        constants = poly_constants(kepler3d_k1, points3d[0])

        assert [c.measured_degree for c in constants] == [4, 3]

    def test_four_d(self, four_d, points4d):
        constants = poly_constants(four_d, points4d[0])

        assert [c.measured_degree for c in constants] == [4, 4, 3]


class TestAngleBrackets:
    """Tests for brackets of the chain constants with the angle variables."""

    def test_canonical_structure(self, oscillator3d_k1):
        """Test |{L_j, L'_i}| = δ_{j,i+1}."""
        for x in sample_points(oscillator3d_k1, 3, seed=6):
            out = angle_brackets(oscillator3d_k1, x)
            expected = np.zeros((3, 2))
            expected[1, 0] = expected[2, 1] = 1.0

            assert np.abs(out) == pytest.approx(expected, abs=1e-6)
