"""Tests for hyperbolic pairs and their construction from chain data."""

import numpy as np
import pytest

from src.chain.hamiltonian import UnsupportedSystemError, build_system, chain_values
from src.chain.models import PhasePoint
from src.chain.sampling import sample_points
from src.constants.pairs import (
    DegenerateInputError,
    HypPair,
    PairInvariantError,
    angle_combo,
    compose,
    hyp_mul,
    hyp_pow,
    level_pairs,
    pair_radial_kepler,
    pairs_4d_example,
    pairs_oscillator3d,
    rates,
)


@pytest.fixture
def angles():
    rng = np.random.default_rng(7)
    return rng.uniform(-1.0, 1.0, size=8) + 1j * rng.uniform(-1.0, 1.0, size=8)


class TestHypPair:
    """Tests for the addition formulas."""

    def test_identity_holds(self, angles):
        """Test cosh² − sinh² = 1 for pairs built from angles."""
        for x in angles:
            assert HypPair.from_angle(x).residual <= 1e-12

    def test_mul_adds_angles(self, angles):
        """Test that the product pair is the pair of the summed angle."""
        for x, y in zip(angles[:-1], angles[1:]):
            product = hyp_mul(HypPair.from_angle(x), HypPair.from_angle(y))
            expected = HypPair.from_angle(x + y)

            assert product.c == pytest.approx(expected.c, rel=1e-12)
            assert product.s == pytest.approx(expected.s, rel=1e-12, abs=1e-14)

    def test_pow_multiplies_angle(self, angles):
        for x in angles[:4]:
            for n in (-3, 0, 1, 5):
                power = hyp_pow(HypPair.from_angle(x), n)
                expected = HypPair.from_angle(n * x)

                assert power.c == pytest.approx(expected.c, rel=1e-11)
                assert power.s == pytest.approx(expected.s, rel=1e-11, abs=1e-12)

    def test_pow_is_additive(self, angles):
        """Test P^(a+b) = P^a · P^b."""
        pair = HypPair.from_angle(angles[0])
        lhs = hyp_pow(pair, 7)
        rhs = hyp_mul(hyp_pow(pair, 3), hyp_pow(pair, 4))

        assert lhs.c == pytest.approx(rhs.c, rel=1e-12)
        assert lhs.s == pytest.approx(rhs.s, rel=1e-12)

    def test_inverse(self, angles):
        pair = HypPair.from_angle(angles[2])
        product = hyp_mul(pair, pair.inverse())

        assert product.c == pytest.approx(1.0)
        assert abs(product.s) <= 1e-12

    def test_compose_matches_angle_combination(self, angles):
        """Test that compose(a, b, m, n) is the pair of mA − nB."""
        a, b = angles[0], angles[1]
        c, s = compose(
            (HypPair.from_angle(a).c, HypPair.from_angle(a).s),
            (HypPair.from_angle(b).c, HypPair.from_angle(b).s),
            2,
            3,
        )
        expected = HypPair.from_angle(2 * a - 3 * b)

        assert c == pytest.approx(expected.c, rel=1e-11)
        assert s == pytest.approx(expected.s, rel=1e-11)

    def test_compose_is_homogeneous(self):
        """Test that scaling the inputs scales the output by λ^m μ^n."""
        a = (1.3 + 0.2j, 0.4 - 0.1j)
        b = (0.7 - 0.5j, 1.1 + 0.3j)
        c, s = compose(a, b, 2, 1)
        c_scaled, s_scaled = compose((2 * a[0], 2 * a[1]), (3 * b[0], 3 * b[1]), 2, 1)

        assert c_scaled == pytest.approx(12 * c)
        assert s_scaled == pytest.approx(12 * s)

    def test_addition_formulas_over_many_angles(self):
        """Test the pair arithmetic on 10⁴ random complex angles at once."""
        rng = np.random.default_rng(11)
        size = 10_000
        x = rng.uniform(-2.0, 2.0, size) + 1j * rng.uniform(-np.pi, np.pi, size)
        y = rng.uniform(-2.0, 2.0, size) + 1j * rng.uniform(-np.pi, np.pi, size)
        a = (np.cosh(x), np.sinh(x))
        b = (np.cosh(y), np.sinh(y))

        def worst(value, expected):
            return float(np.max(np.abs(value - expected) / np.maximum(1.0, np.abs(expected))))

        c, s = compose(a, b, 3, 2)
        scale = np.maximum(1.0, np.maximum(np.abs(c), np.abs(s)) ** 2)

        assert float(np.max(np.abs(c * c - s * s - 1.0) / scale)) <= 1e-12
        assert worst(c, np.cosh(3 * x - 2 * y)) <= 1e-10
        assert worst(s, np.sinh(3 * x - 2 * y)) <= 1e-10

    def test_triple_angle(self, angles):
        """Test cosh 3x = 4cosh³x − 3cosh x and sinh 3x = 3sinh x + 4sinh³x."""
        for x in angles:
            pair = HypPair.from_angle(x)
            cubed = hyp_pow(pair, 3)

            assert cubed.c == pytest.approx(4 * pair.c**3 - 3 * pair.c, rel=1e-12, abs=1e-12)
            assert cubed.s == pytest.approx(3 * pair.s + 4 * pair.s**3, rel=1e-12, abs=1e-12)

    def test_invariant_enforced(self):
        """Test that a pair off the hyperbola is refused."""
        with pytest.raises(PairInvariantError):
            hyp_mul(HypPair(c=2.0, s=0.0), HypPair.identity())


class TestAngleCombo:
    """Tests for the integer combinations m𝓐 − n𝓑."""

    def test_oscillator3d(self, oscillator3d):
        """Test k = (3/2, 5/3) gives (2, 3) then (9, 10)."""
        assert angle_combo(oscillator3d, 1) == (2, 3)
        assert angle_combo(oscillator3d, 2) == (9, 10)

    def test_kepler_base_rate(self, kepler3d_k1):
        """Test that the Kepler radial level advances at half rate."""
        assert str(rates(kepler3d_k1)[0]) == "1/2"
        assert angle_combo(kepler3d_k1, 1) == (1, 2)
        assert angle_combo(kepler3d_k1, 2) == (1, 1)

    def test_four_d(self, four_d):
        assert [angle_combo(four_d, i) for i in (1, 2, 3)] == [(1, 2), (2, 1), (1, 1)]

    def test_no_constant_at_last_level(self, oscillator3d):
        with pytest.raises(UnsupportedSystemError):
            angle_combo(oscillator3d, 3)

    def test_combo_cap(self):
        """Test that huge combinations are refused."""
        system = build_system("oscillator3d", alpha=1.0, beta=[1.0, 2.0, 3.0], k=["65/64", "1"])

        with pytest.raises(UnsupportedSystemError, match="exceeds"):
            angle_combo(system, 1)


class TestLevelPairs:
    """Tests for pairs computed at phase points."""

    def test_pairs_on_hyperbola(self, oscillator3d, points3d):
        """Test that every normalized pair satisfies cosh² − sinh² = 1."""
        for x in points3d:
            for a, b in level_pairs(oscillator3d, x):
                assert a.residual <= 1e-8
                assert b.residual <= 1e-8

    def test_kepler_pairs_on_hyperbola(self, kepler3d):
        for x in sample_points(kepler3d, 5, seed=3):
            for a, b in level_pairs(kepler3d, x):
                assert a.residual <= 1e-8
                assert b.residual <= 1e-8

    def test_named_views(self, oscillator3d, four_d, kepler3d, points3d, points4d):
        """Test the per-family accessors."""
        b1, a1, b2, a2 = pairs_oscillator3d(oscillator3d, points3d[0])
        (a1_, b1_), _ = level_pairs(oscillator3d, points3d[0])

        assert (a1, b1) == (a1_, b1_)
        assert len(pairs_4d_example(four_d, points4d[0])) == 6
        assert pair_radial_kepler(kepler3d, points3d[0]).residual <= 1e-8

    def test_named_views_check_family(self, kepler3d, oscillator3d, points3d):
        with pytest.raises(UnsupportedSystemError):
            pairs_oscillator3d(kepler3d, points3d[0])
        with pytest.raises(UnsupportedSystemError):
            pair_radial_kepler(oscillator3d, points3d[0])

    def test_degenerate_orbit(self, oscillator3d_k1):
        """Test a circular orbit: p_r = 0 with H² = 4αL2 makes 𝓑1 undefined."""
        q = [1.0, 0.6, 0.5]
        system = oscillator3d_k1
        # L2 at p = 0 on the angular levels, then r chosen so that H = 2√(αL2)
        l2 = chain_values(system, q, [0.0, 0.0, 0.0])[1]
        r = l2**0.25
        x = PhasePoint(q=[r, 0.6, 0.5], p=[0.0, 0.0, 0.0])

        with pytest.raises(DegenerateInputError):
            level_pairs(system, x)


class TestKeplerRadialPair:
    """Tests for 𝓑1 of the Kepler-Coulomb chain at special orbits."""

    @staticmethod
    def angular_l2(system, t1, t2):
        """L2 with the angular momenta at rest; independent of r and p_r."""
        return chain_values(system, [1.0, t1, t2], [0.0, 0.0, 0.0])[1]

    def test_turning_point(self, kepler3d):
        """Test that p_r = 0 gives cosh 𝓑1 = 0 and sinh 𝓑1 = ±i."""
        x = PhasePoint(q=[1.4, 0.5, 0.4], p=[0.0, 0.3, -0.2])
        pair = pair_radial_kepler(kepler3d, x)

        assert abs(pair.c) <= 1e-14
        assert abs(pair.s.real) <= 1e-14
        assert abs(pair.s.imag) == pytest.approx(1.0)

    def test_circular_orbit_is_degenerate(self, kepler3d):
        """Test α² + 4HL2 = 0 at r = −2L2/α with p = 0."""
        l2 = self.angular_l2(kepler3d, 0.5, 0.4)
        x = PhasePoint(q=[2.0 * l2, 0.5, 0.4], p=[0.0, 0.0, 0.0])

        with pytest.raises(DegenerateInputError, match="B1"):
            pair_radial_kepler(kepler3d, x)

    @pytest.mark.parametrize("offset", [1e-1, 1e-2, 1e-3])
    def test_near_circular_orbit_stays_finite(self, kepler3d, offset):
        """Test that a small nonzero discriminant still gives a pair on the hyperbola."""
        l2 = self.angular_l2(kepler3d, 0.5, 0.4)
        x = PhasePoint(q=[2.0 * l2 * (1.0 + offset), 0.5, 0.4], p=[0.0, 0.0, 0.0])
        pair = pair_radial_kepler(kepler3d, x)

        assert np.isfinite(pair.c) and np.isfinite(pair.s)
        assert pair.residual <= 1e-8
