"""Seeded random phase points inside the regular domain of a chain."""

from dataclasses import dataclass

import numpy as np

from .hamiltonian import angular_parameters
from .models import ChainSystem, PhasePoint


@dataclass(frozen=True)
class SamplingBox:
    """Uniform sampling box for phase points.

    Angles are drawn from ``theta_fraction`` of the first fundamental domain
    (0, π/(2k)) of their level.
    """

    r: tuple[float, float] = (0.5, 2.0)
    theta_fraction: tuple[float, float] = (0.1, 0.9)
    p: tuple[float, float] = (-2.0, 2.0)


DEFAULT_BOX = SamplingBox()


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator per (seed, stream) so suites never share draws."""
    return np.random.default_rng([seed, stream])


def angle_ranges(system: ChainSystem, box: SamplingBox = DEFAULT_BOX) -> list[tuple[float, float]]:
    """Sampling interval for every angular coordinate θ_1 … θ_{n-1}."""
    lo, hi = box.theta_fraction
    ranges = []
    for k in angular_parameters(system):
        width = np.pi / (2 * k.value)
        ranges.append((lo * width, hi * width))
    return ranges


def sample_coordinates(
    system: ChainSystem,
    rng: np.random.Generator,
    count: int,
    box: SamplingBox = DEFAULT_BOX,
) -> np.ndarray:
    """(count, n) array of in-domain coordinates."""
    q = np.empty((count, system.n))
    q[:, 0] = rng.uniform(box.r[0], box.r[1], size=count)
    for j, (lo, hi) in enumerate(angle_ranges(system, box), start=1):
        q[:, j] = rng.uniform(lo, hi, size=count)
    return q


def sample_points(
    system: ChainSystem,
    count: int,
    seed: int = 0,
    stream: int = 0,
    box: SamplingBox = DEFAULT_BOX,
) -> list[PhasePoint]:
    """Draw ``count`` phase points; identical arguments give identical points."""
    rng = make_rng(seed, stream)
    q = sample_coordinates(system, rng, count, box)
    p = rng.uniform(box.p[0], box.p[1], size=(count, system.n))
    return [PhasePoint(q=q[i], p=p[i]) for i in range(count)]
