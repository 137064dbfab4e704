"""Tests for Poisson brackets, involution and rank."""

import numpy as np
import pytest

from src.autodiff.bracket import (
    NonFiniteError,
    Observable,
    bracket_observable,
    chain_gradients,
    chain_observable,
    chain_observables,
    coordinate_observable,
    finite_difference_gradient,
    gradient,
    independence_rank,
    involution_matrix,
    momentum_observable,
    normalized_bracket,
    poisson_bracket,
    product_observable,
)
from src.chain.sampling import sample_points
from src.constants.poly import numerator_observable


class TestBracketBasics:
    """Tests for the sign convention and elementary brackets."""

    def test_canonical_pair(self, points3d):
        """Test {p_i, q_j} = δ_ij."""
        x = points3d[0]
        for i in range(1, 4):
            for j in range(1, 4):
                expected = 1.0 if i == j else 0.0
                assert poisson_bracket(momentum_observable(i), coordinate_observable(j), x) == expected

    def test_antisymmetry(self, oscillator3d, points3d):
        """Test {f, g} = −{g, f} exactly."""
        h = chain_observable(oscillator3d, 1)
        f = Observable(fn=lambda q, p: q[0] * p[1] + p[2] * p[2], label="f")
        for x in points3d[:3]:
            assert poisson_bracket(h, f, x) == -poisson_bracket(f, h, x)

    def test_hamilton_equation(self, oscillator3d, points3d):
        """Test {H, q_1} = dq_1/dt = 2p_r."""
        h = chain_observable(oscillator3d, 1)
        x = points3d[0]

        assert poisson_bracket(h, coordinate_observable(1), x) == pytest.approx(2 * x.p[0])

    def test_level_out_of_range(self, oscillator3d):
        with pytest.raises(ValueError, match="outside"):
            chain_observable(oscillator3d, 4)


class TestGradient:
    """Tests for dual-number gradients."""

    @pytest.mark.parametrize("family", ["oscillator3d", "kepler3d", "four_d"])
    def test_matches_finite_differences(self, request, family):
        """Test gradients of every L_i against central differences."""
        system = request.getfixturevalue(family)
        for x in sample_points(system, 20, seed=21):
            for f in chain_observables(system):
                exact = gradient(f, x)
                approx = finite_difference_gradient(f, x)
                scale = max(1.0, float(np.max(np.abs(exact))))
                assert np.max(np.abs(exact - approx)) <= 1e-6 * scale

    def test_chain_gradients_match_single_gradients(self, four_d, points4d):
        """Test that one pass through the recursion gives every row."""
        x = points4d[0]
        rows = chain_gradients(four_d, x)
        for i, f in enumerate(chain_observables(four_d)):
            assert rows[i] == pytest.approx(gradient(f, x))

    def test_non_finite_detected(self, points3d):
        """Test that an infinite derivative is reported."""
        f = Observable(fn=lambda q, p: p[0] * float("inf"), label="bad")

        with pytest.raises(NonFiniteError, match="bad"):
            gradient(f, points3d[0])


class TestInvolution:
    """Tests for pairwise commutation of the chain constants."""

    def test_oscillator3d(self, oscillator3d, points3d):
        worst = involution_matrix(oscillator3d, points3d)

        assert worst.shape == (3, 3)
        assert worst.max() <= 1e-9

    def test_kepler3d(self, kepler3d):
        assert involution_matrix(kepler3d, sample_points(kepler3d, 10, seed=5)).max() <= 1e-9

    def test_four_d(self, four_d, points4d):
        assert involution_matrix(four_d, points4d).max() <= 1e-9

    def test_detects_non_commuting_pair(self, oscillator3d, points3d):
        """Test that p_r does not commute with H."""
        h = chain_observable(oscillator3d, 1)

        assert max(normalized_bracket(h, momentum_observable(1), x) for x in points3d) > 1e-3

    def test_needs_points(self, oscillator3d):
        with pytest.raises(ValueError):
            involution_matrix(oscillator3d, [])


class TestJacobiIdentity:
    """Tests for nested brackets."""

    def test_jacobi(self, oscillator3d, points3d):
        """Test {f,{g,h}} + {g,{h,f}} + {h,{f,g}} = 0 for three non-commuting functions."""
        f = chain_observable(oscillator3d, 2)
        g = Observable(fn=lambda q, p: q[0] * p[0] + q[1] * q[2], label="g")
        h = Observable(fn=lambda q, p: p[1] * p[2] + q[0] * q[0] * p[2], label="h")
        for x in points3d[:3]:
            terms = [
                poisson_bracket(f, bracket_observable(g, h), x),
                poisson_bracket(g, bracket_observable(h, f), x),
                poisson_bracket(h, bracket_observable(f, g), x),
            ]
            scale = max(abs(t) for t in terms)
            assert abs(sum(terms)) <= 1e-8 * max(scale, 1.0)

    @pytest.mark.parametrize("family", ["oscillator3d", "four_d"])
    def test_leibniz_rule(self, request, family):
        """Test {f, gh} = g{f, h} + h{f, g} on chain constants and momenta."""
        system = request.getfixturevalue(family)
        f = chain_observable(system, 2)
        pairs = [
            (chain_observable(system, 1), momentum_observable(1)),
            (momentum_observable(2), chain_observable(system, 3)),
            (coordinate_observable(2), momentum_observable(system.n)),
        ]
        for x in sample_points(system, 10, seed=13):
            for g, h in pairs:
                gh = product_observable(g, h)
                lhs = poisson_bracket(f, gh, x)
                rhs = g.evaluate(x) * poisson_bracket(f, h, x) + h.evaluate(x) * poisson_bracket(f, g, x)
                scale = max(np.linalg.norm(gradient(f, x)) * np.linalg.norm(gradient(gh, x)), 1.0)

                assert abs(lhs - rhs) <= 1e-10 * scale


class TestIndependenceRank:
    """Tests for functional independence of the constants."""

    def test_oscillator3d_rank(self, oscillator3d_k1):
        """Test rank 5 = 2n − 1 from the chain plus both numerator constants."""
        fs = chain_observables(oscillator3d_k1) + [numerator_observable(oscillator3d_k1, i) for i in (1, 2)]
        report = independence_rank(fs, sample_points(oscillator3d_k1, 3, seed=2))

        assert report.rank == 5
        assert len(report.point_ranks) == 3

    def test_four_d_rank(self, four_d, points4d):
        """Test rank 7 = 2n − 1 for the four-level chain."""
        fs = chain_observables(four_d) + [numerator_observable(four_d, i) for i in (1, 2, 3)]

        assert independence_rank(fs, points4d[:3]).rank == 7

    def test_chain_alone_has_rank_n(self, four_d, points4d):
        assert independence_rank(chain_observables(four_d), points4d[:2]).rank == 4

    def test_dependent_function_adds_nothing(self, oscillator3d, points3d):
        """Test that H² does not raise the rank."""
        h = chain_observable(oscillator3d, 1)
        h_squared = Observable(fn=lambda q, p: h(q, p) * h(q, p), label="H^2")

        assert independence_rank([h, h_squared], points3d[:2]).rank == 1

    def test_rejects_bad_tolerance(self, oscillator3d, points3d):
        with pytest.raises(ValueError):
            independence_rank(chain_observables(oscillator3d), points3d, tol=0.0)
