"""Adaptive integration of Hamilton's equations and conservation drift."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853

from src.autodiff.bracket import Observable
from src.chain.hamiltonian import ChainError, DomainError, check_domain, flow_field
from src.chain.models import ChainSystem, PhasePoint
from src.utils.logging import get_logger

logger = get_logger(__name__)

MIN_TOL = 1e-14
MAX_TOL = 1e-3
MAX_STEPS = 1_000_000
# DOP853: 12 function evaluations per attempted step, 2 for start-up
_STAGES = 12
_STARTUP_EVALS = 2


class IntegrationError(ChainError):
    """Integration could not reach t_max."""

    pass


class StepUnderflowError(IntegrationError):
    """Step size collapsed below floating-point resolution."""

    pass


@dataclass(frozen=True)
class ControllerStats:
    steps: int = 0
    rejects: int = 0
    nfev: int = 0
    min_step: float = 0.0
    max_step: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    """Accepted controller steps of one integration, endpoint included."""

    system: ChainSystem
    times: np.ndarray
    states: np.ndarray
    stats: ControllerStats = field(default_factory=ControllerStats)

    def __len__(self) -> int:
        return len(self.times)

    def point(self, index: int) -> PhasePoint:
        return PhasePoint.from_vector(self.states[index])

    @property
    def samples(self) -> list[tuple[float, PhasePoint]]:
        return [(float(t), self.point(i)) for i, t in enumerate(self.times)]

    @property
    def start(self) -> PhasePoint:
        return self.point(0)

    @property
    def end(self) -> PhasePoint:
        return self.point(-1)


def _check_tolerance(name: str, value: float) -> None:
    if not MIN_TOL <= value <= MAX_TOL:
        raise ValueError(f"{name}={value} outside [{MIN_TOL}, {MAX_TOL}]")


def integrate(
    system: ChainSystem,
    x0: PhasePoint,
    t_max: float,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-12,
    max_steps: int = MAX_STEPS,
) -> Trajectory:
    """Integrate from x0 to t_max with the Dormand–Prince 8(5,3) pair.

    Every accepted state is checked against the domain margin; a breach, or
    a stage evaluated inside the margin, aborts with DomainError.
    """
    _check_tolerance("rel_tol", rel_tol)
    _check_tolerance("abs_tol", abs_tol)
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    check_domain(system, x0.q)

    y0 = x0.as_vector()
    times = [0.0]
    states = [y0.copy()]
    if t_max == 0:
        return Trajectory(system=system, times=np.array(times), states=np.array(states))

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return flow_field(system, PhasePoint.from_vector(y))

    solver = DOP853(rhs, 0.0, y0, t_bound=t_max, rtol=rel_tol, atol=abs_tol)
    n = system.n
    while solver.status == "running":
        if len(times) > max_steps:
            raise IntegrationError(f"gave up after {max_steps} steps at t={solver.t}")
        try:
            message = solver.step()
        except DomainError as e:
            raise DomainError(f"stage left the domain near t={solver.t}: {e}", level=e.level) from e
        if solver.status == "failed":
            raise StepUnderflowError(f"integration failed at t={solver.t}: {message}")
        try:
            check_domain(system, solver.y[:n])
        except DomainError as e:
            raise DomainError(f"trajectory entered the domain margin at t={solver.t}: {e}", level=e.level) from e
        times.append(float(solver.t))
        states.append(solver.y.copy())

    steps = np.diff(times)
    accepted = len(steps)
    stats = ControllerStats(
        steps=accepted,
        rejects=max(0, (solver.nfev - _STARTUP_EVALS) // _STAGES - accepted),
        nfev=int(solver.nfev),
        min_step=float(steps.min()),
        max_step=float(steps.max()),
    )
    logger.debug("trajectory_integrated", t_max=t_max, steps=stats.steps, rejects=stats.rejects, nfev=stats.nfev)
    return Trajectory(system=system, times=np.array(times), states=np.array(states), stats=stats)


def drift_report(traj: Trajectory, fs: Sequence[Observable]) -> dict[str, float]:
    """max_t |f(x(t)) − f(x0)| / max(|f(x0)|, 1) per observable."""
    points = [traj.point(i) for i in range(len(traj))]
    report: dict[str, float] = {}
    for f in fs:
        values = np.array([f.evaluate(x) for x in points])
        initial = values[0]
        report[f.label] = float(np.max(np.abs(values - initial)) / max(abs(initial), 1.0))
    return report


def reversed_endpoint(traj: Trajectory) -> PhasePoint:
    """Final state with momenta negated; integrating it retraces the trajectory."""
    end = traj.end
    return PhasePoint(q=end.q, p=-end.p)
