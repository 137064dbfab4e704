"""Shared fixtures: built-in chains and seeded phase points."""

import pytest

from src.chain.hamiltonian import build_system
from src.chain.models import ChainSystem, PhasePoint
from src.chain.sampling import sample_points


@pytest.fixture
def oscillator3d() -> ChainSystem:
    """3D oscillator chain with k = (3/2, 5/3)."""
    return build_system("oscillator3d", alpha=1.0, beta=[1.0, 2.0, 3.0], k=["3/2", "5/3"])


@pytest.fixture
def oscillator3d_k1() -> ChainSystem:
    """3D oscillator chain with k = (1, 1), the separable flat case."""
    return build_system("oscillator3d", alpha=1.0, beta=[1.0, 2.0, 3.0], k=["1", "1"])


@pytest.fixture
def kepler3d() -> ChainSystem:
    return build_system("kepler_coulomb3d", alpha=-1.0, beta=[1.0, 2.0, 3.0], k=["3/2", "5/3"])


@pytest.fixture
def kepler3d_k1() -> ChainSystem:
    return build_system("kepler_coulomb3d", alpha=-1.0, beta=[1.0, 2.0, 3.0], k=["1", "1"])


@pytest.fixture
def four_d() -> ChainSystem:
    """Four-level oscillator chain with k = (2, 1, 1)."""
    return build_system("four_d_example", alpha=1.0, beta=[1.0, 2.0, 3.0, 4.0], k=["2", "1", "1"])


@pytest.fixture
def points3d(oscillator3d: ChainSystem) -> list[PhasePoint]:
    return sample_points(oscillator3d, 10, seed=11)


@pytest.fixture
def points4d(four_d: ChainSystem) -> list[PhasePoint]:
    return sample_points(four_d, 8, seed=11)
