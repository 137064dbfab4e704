"""Tests for adaptive integration and conservation drift."""

import numpy as np
import pytest

from src.autodiff.bracket import chain_observables, momentum_observable
from src.chain.hamiltonian import DomainError, build_system
from src.chain.models import PhasePoint
from src.chain.sampling import sample_points
from src.constants.poly import numerator_observable
from src.dynamics.integrator import drift_report, integrate, reversed_endpoint


@pytest.fixture
def oscillator1d():
    """H = p² + q², period π."""
    return build_system("oscillator_nd", alpha=1.0, beta=[], k=[])


class TestIntegrate:
    """Tests for the DOP853 driver."""

    def test_one_dimensional_period(self, oscillator1d):
        """Test that (1, 0) returns to itself after one period."""
        traj = integrate(oscillator1d, PhasePoint(q=[1.0], p=[0.0]), np.pi)

        assert traj.times[-1] == pytest.approx(np.pi)
        assert traj.end.q[0] == pytest.approx(1.0, abs=1e-8)
        assert traj.end.p[0] == pytest.approx(0.0, abs=1e-8)

    def test_zero_duration(self, oscillator3d, points3d):
        """Test that t_max = 0 gives the single initial sample."""
        traj = integrate(oscillator3d, points3d[0], 0.0)

        assert len(traj) == 1
        assert traj.states[0] == pytest.approx(points3d[0].as_vector())

    def test_controller_stats(self, oscillator1d):
        traj = integrate(oscillator1d, PhasePoint(q=[1.0], p=[0.0]), 5.0)

        assert traj.stats.steps == len(traj) - 1
        assert traj.stats.nfev > 0
        assert 0 < traj.stats.min_step <= traj.stats.max_step

    @pytest.mark.parametrize("tol", [0.0, 1e-15, 1e-2])
    def test_tolerance_range(self, oscillator1d, tol):
        with pytest.raises(ValueError, match="outside"):
            integrate(oscillator1d, PhasePoint(q=[1.0], p=[0.0]), 1.0, rel_tol=tol)

    def test_negative_time(self, oscillator1d):
        with pytest.raises(ValueError):
            integrate(oscillator1d, PhasePoint(q=[1.0], p=[0.0]), -1.0)

    def test_start_outside_domain(self, oscillator3d):
        with pytest.raises(DomainError):
            integrate(oscillator3d, PhasePoint(q=[-1.0, 0.5, 0.4], p=[0.0, 0.0, 0.0]), 1.0)

    def test_time_reversal(self, oscillator3d, points3d):
        """Test that flipping the momenta retraces the trajectory."""
        x0 = points3d[3]
        forward = integrate(oscillator3d, x0, 2.0)
        back = integrate(oscillator3d, reversed_endpoint(forward), 2.0)

        assert back.end.q == pytest.approx(x0.q, abs=1e-8)
        assert -back.end.p == pytest.approx(x0.p, abs=1e-8)


class TestDrift:
    """Tests for conservation along trajectories."""

    def test_chain_constants_conserved(self, oscillator3d, points3d):
        """Test that every L_i drifts by less than 1e-6 over a short run."""
        traj = integrate(oscillator3d, points3d[0], 5.0)
        report = drift_report(traj, chain_observables(oscillator3d))

        assert set(report) == {"L1", "L2", "L3"}
        assert max(report.values()) <= 1e-6

    def test_radial_momentum_negative_control(self, oscillator3d, points3d):
        """Test that p_r is not conserved."""
        traj = integrate(oscillator3d, points3d[0], 5.0)
        report = drift_report(traj, [momentum_observable(1)])

        assert report["p1"] > 1e-2

    def test_kepler_energy(self, kepler3d):
        """Test energy conservation on a Kepler-Coulomb trajectory."""
        x0 = PhasePoint(q=[1.0, 0.5, 0.4], p=[0.1, 0.2, -0.1])
        traj = integrate(kepler3d, x0, 2.0)

        assert drift_report(traj, chain_observables(kepler3d))["L1"] <= 1e-6


@pytest.mark.slow
class TestLongTrajectories:
    """Tests over the full conservation horizon."""

    def test_drift_shrinks_with_tolerance(self, oscillator3d, points3d):
        """Test that tightening rel_tol from 1e-8 to 1e-12 reduces the H drift."""
        h = chain_observables(oscillator3d)[:1]
        drifts = [
            drift_report(integrate(oscillator3d, points3d[1], 20.0, rel_tol=tol, abs_tol=tol), h)["L1"]
            for tol in (1e-8, 1e-10, 1e-12)
        ]

        assert drifts[0] > drifts[1] >= drifts[2]

    @pytest.mark.parametrize("family", ["oscillator3d", "kepler3d_k1", "four_d"])
    def test_constants_conserved_to_t100(self, request, family):
        """Test every L_i and numerator constant over five trajectories to t = 100."""
        system = request.getfixturevalue(family)
        observables = [*chain_observables(system), *(numerator_observable(system, j) for j in range(1, system.n))]
        for x0 in sample_points(system, 5, seed=0):
            traj = integrate(system, x0, 100.0, rel_tol=1e-12)
            report = drift_report(traj, [*observables, momentum_observable(1)])

            assert report.pop("p1") > 1e-2
            assert len(report) == 2 * system.n - 1
            assert max(report.values()) <= 1e-6
