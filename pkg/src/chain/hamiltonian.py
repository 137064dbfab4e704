"""Construction and evaluation of chained Hamiltonians.

L_n = p_n² + V_n(q_n)
L_i = p_i² + V_i(q_i) + f_i(q_i) L_{i+1},    H = L_1

Every evaluator here is generic over its scalar type so that the same code
runs on floats and on dual numbers.
"""

from collections.abc import Sequence
from typing import Any

import numpy as np

from src.autodiff import dual
from src.utils.logging import get_logger

from .models import (
    DEFAULT_MAX_DIMENSION,
    ChainLevel,
    ChainSystem,
    ChainValues,
    CouplingKind,
    CouplingTerm,
    FamilyTag,
    PhasePoint,
    PotentialKind,
    PotentialTerm,
    RationalParam,
)

logger = get_logger(__name__)


class ChainError(Exception):
    """Base exception for chain evaluation and everything built on it."""

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level


class DomainError(ChainError):
    """Point lies on, or within the margin of, a singular set."""

    pass


class UnsupportedSystemError(ChainError):
    """Family/level combination the requested operation cannot handle."""

    pass


# family -> (n or None for "len(k) + 1", radial kind)
FAMILIES: dict[FamilyTag, tuple[int | None, PotentialKind]] = {
    FamilyTag.OSCILLATOR_3D: (3, PotentialKind.HARMONIC_RADIAL),
    FamilyTag.KEPLER_COULOMB_3D: (3, PotentialKind.KEPLER_RADIAL),
    FamilyTag.FOUR_D_EXAMPLE: (4, PotentialKind.HARMONIC_RADIAL),
    FamilyTag.OSCILLATOR_ND: (None, PotentialKind.HARMONIC_RADIAL),
    FamilyTag.KEPLER_COULOMB_ND: (None, PotentialKind.KEPLER_RADIAL),
}

FOUR_D_DEFAULT_K = ("2", "1", "1")


def expected_arity(family: FamilyTag, n: int | None = None) -> tuple[int, int]:
    """(len(β), len(k)) a family expects; n only matters for the *_nd families."""
    if family not in FAMILIES:
        raise UnsupportedSystemError(f"family {family.value} has no parameter arity")
    fixed, _ = FAMILIES[family]
    dim = fixed if fixed is not None else n
    if dim is None:
        raise UnsupportedSystemError(f"family {family.value} needs an explicit dimension")
    return (dim if dim >= 2 else 0), dim - 1


def build_system(
    family: FamilyTag | str,
    alpha: float,
    beta: Sequence[float],
    k: Sequence[RationalParam | str | int],
    eps_dom: float | None = None,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> ChainSystem:
    """Build one of the built-in chain families.

    Level 1 carries the radial term α r² (or α/r) and the 1/r² coupling;
    level j >= 2 carries β_{j-1}/cos²(k_{j-1}θ_{j-1}) and, except at the last
    level, the 1/sin²(k_{j-1}θ_{j-1}) coupling; the last level also carries
    β_n/sin²(k_{n-1}θ_{n-1}).
    """
    family = FamilyTag(family)
    if family == FamilyTag.CUSTOM:
        raise UnsupportedSystemError("custom chains are built with build_custom(levels)")

    ks = [kk if isinstance(kk, RationalParam) else RationalParam.parse(kk) for kk in k]
    n = len(ks) + 1
    n_beta, n_k = expected_arity(family, n)
    if len(ks) != n_k:
        raise UnsupportedSystemError(f"{family.value} expects {n_k} angular parameters, got {len(ks)}")
    if len(beta) != n_beta:
        raise UnsupportedSystemError(f"{family.value} expects {n_beta} beta values, got {len(beta)}")

    _, radial = FAMILIES[family]
    levels: list[ChainLevel] = [
        ChainLevel(
            potential=(PotentialTerm(kind=radial, coefficient=float(alpha)),),
            coupling=CouplingTerm(kind=CouplingKind.INV_RADIAL_SQ) if n > 1 else None,
        )
    ]
    for j in range(2, n + 1):
        kj = ks[j - 2]
        terms = [PotentialTerm(kind=PotentialKind.INV_COS_SQ, coefficient=float(beta[j - 2]), k=kj)]
        if j == n:
            terms.append(PotentialTerm(kind=PotentialKind.INV_SIN_SQ, coefficient=float(beta[j - 1]), k=kj))
            coupling = None
        else:
            coupling = CouplingTerm(kind=CouplingKind.INV_SIN_SQ, k=kj)
        levels.append(ChainLevel(potential=tuple(terms), coupling=coupling))

    extra = {"eps_dom": eps_dom} if eps_dom is not None else {}
    system = ChainSystem(levels=tuple(levels), family=family, max_dimension=max_dimension, **extra)
    logger.debug("system_built", family=family.value, n=n, k=[str(kk) for kk in ks])
    return system


def build_custom(
    levels: Sequence[ChainLevel],
    eps_dom: float | None = None,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> ChainSystem:
    """Build a custom chain from declared levels (term vocabulary only)."""
    extra = {"eps_dom": eps_dom} if eps_dom is not None else {}
    return ChainSystem(
        levels=tuple(levels), family=FamilyTag.CUSTOM, max_dimension=max_dimension, **extra
    )


def angular_parameters(system: ChainSystem) -> list[RationalParam]:
    """k_1 … k_{n-1}: the common angular parameter of each level j >= 2.

    Raises UnsupportedSystemError when a level mixes different k values.
    """
    ks: list[RationalParam] = []
    for j in range(2, system.n + 1):
        level = system.level(j)
        found = {t.k for t in level.potential if t.k is not None and not t.is_absent}
        if level.coupling is not None and level.coupling.k is not None:
            found.add(level.coupling.k)
        if len(found) > 1:
            raise UnsupportedSystemError(f"level {j} mixes angular parameters", level=j)
        if not found:
            # free angle: any k gives the same dynamics, take the coupling-free default
            found = {RationalParam(num=1)}
        ks.append(found.pop())
    return ks


def _potential(term: PotentialTerm, x: Any) -> Any:
    c = term.coefficient
    if term.kind == PotentialKind.HARMONIC_RADIAL:
        return c * x * x
    if term.kind == PotentialKind.KEPLER_RADIAL:
        return c / x
    assert term.k is not None
    arg = term.k.value * x
    if term.kind == PotentialKind.INV_COS_SQ:
        return c / dual.cos(arg) ** 2
    return c / dual.sin(arg) ** 2


def coupling_factor(coupling: CouplingTerm, x: Any) -> Any:
    """f_i(q_i)."""
    if coupling.kind == CouplingKind.INV_RADIAL_SQ:
        return 1.0 / (x * x)
    assert coupling.k is not None
    return 1.0 / dual.sin(coupling.k.value * x) ** 2


def level_potential(level: ChainLevel, x: Any) -> Any:
    """V_i(q_i) with absent terms skipped."""
    total: Any = 0.0
    for term in level.potential:
        if not term.is_absent:
            total = total + _potential(term, x)
    return total


def check_domain(system: ChainSystem, q: Sequence[Any]) -> None:
    """Raise DomainError when q is within eps_dom of a singular set."""
    eps = system.eps_dom
    values = [float(np.real(dual.primal(x))) for x in q]
    if len(values) != system.n:
        raise DomainError(f"expected {system.n} coordinates, got {len(values)}")
    first = system.level(1)
    # a lone harmonic level is a plain 1D oscillator on the whole line
    singular_at_origin = first.coupling is not None or any(
        t.kind == PotentialKind.KEPLER_RADIAL and not t.is_absent for t in first.potential
    )
    if singular_at_origin and not values[0] > eps:
        raise DomainError(f"radial coordinate r={values[0]} is not positive", level=1)
    for index, level in enumerate(system.levels, start=1):
        x = values[index - 1]
        for term in level.potential:
            if term.is_absent or term.k is None:
                continue
            arg = term.k.value * x
            if term.kind == PotentialKind.INV_COS_SQ and abs(np.cos(arg)) <= eps:
                raise DomainError(f"cos({term.k}·q{index}) vanishes at q{index}={x}", level=index)
            if term.kind == PotentialKind.INV_SIN_SQ and abs(np.sin(arg)) <= eps:
                raise DomainError(f"sin({term.k}·q{index}) vanishes at q{index}={x}", level=index)
        coupling = level.coupling
        if coupling is not None and coupling.k is not None:
            if abs(np.sin(coupling.k.value * x)) <= eps:
                raise DomainError(f"coupling sin({coupling.k}·q{index}) vanishes at q{index}={x}", level=index)


def chain_values(system: ChainSystem, q: Sequence[Any], p: Sequence[Any], check: bool = True) -> list[Any]:
    """[L_1, …, L_n] for generic scalars (floats or duals)."""
    if check:
        check_domain(system, q)
    n = system.n
    values: list[Any] = [0.0] * n
    inner: Any = None
    for i in range(n, 0, -1):
        level = system.level(i)
        x, momentum = q[i - 1], p[i - 1]
        value = momentum * momentum + level_potential(level, x)
        if level.coupling is not None:
            value = value + coupling_factor(level.coupling, x) * inner
        values[i - 1] = value
        inner = value
    return values


def eval_chain(system: ChainSystem, x: PhasePoint) -> ChainValues:
    """Evaluate L_n, …, L_1 at a phase point."""
    if x.n != system.n:
        raise DomainError(f"phase point has dimension {x.n}, system has {system.n}")
    return ChainValues(L=tuple(float(v) for v in chain_values(system, x.q, x.p)))


def hamiltonian(system: ChainSystem, q: Sequence[Any], p: Sequence[Any]) -> Any:
    return chain_values(system, q, p)[0]


def flow_field(system: ChainSystem, x: PhasePoint) -> np.ndarray:
    """Hamilton's equations (q̇, ṗ) = (∂H/∂p, −∂H/∂q) via one vector-mode dual pass."""
    n = system.n
    seeded = dual.seed_vector(x.as_vector())
    H = hamiltonian(system, seeded[:n], seeded[n:])
    grad = np.asarray(H.eps, dtype=float) if isinstance(H, dual.Dual) else np.zeros(2 * n)
    return np.concatenate([grad[n:], -grad[:n]])


def inverse_metric_entries(system: ChainSystem, q: Sequence[Any]) -> list[Any]:
    """g^{ii}: g^{11} = 1, g^{i+1,i+1} = g^{ii} f_i(q_i)."""
    entries: list[Any] = [1.0]
    for i in range(1, system.n):
        coupling = system.level(i).coupling
        assert coupling is not None
        entries.append(entries[-1] * coupling_factor(coupling, q[i - 1]))
    return entries


def inverse_metric(system: ChainSystem, q: Sequence[float]) -> np.ndarray:
    """Diagonal of the inverse metric read off the kinetic term of H."""
    check_domain(system, q)
    return np.array([float(v) for v in inverse_metric_entries(system, q)])


def metric_entries(system: ChainSystem, q: Sequence[Any]) -> list[Any]:
    """g_{ii} = 1/g^{ii}, built as products of r² and sin² factors."""
    entries: list[Any] = [1.0]
    for i in range(1, system.n):
        coupling = system.level(i).coupling
        assert coupling is not None
        x = q[i - 1]
        if coupling.kind == CouplingKind.INV_RADIAL_SQ:
            factor = x * x
        else:
            assert coupling.k is not None
            factor = dual.sin(coupling.k.value * x) ** 2
        entries.append(entries[-1] * factor)
    return entries


def to_cartesian_3d(x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """Map a polar point (r, θ1, θ2) with k = (1, 1) to Cartesian (xyz, p_xyz).

    z = r cos θ1, x = r sin θ1 cos θ2, y = r sin θ1 sin θ2; momenta transform
    covariantly, p_polar = Jᵀ p_cart.
    """
    if x.n != 3:
        raise UnsupportedSystemError(f"Cartesian map needs n=3, got n={x.n}")
    r, t1, t2 = x.q
    s1, c1, s2, c2 = np.sin(t1), np.cos(t1), np.sin(t2), np.cos(t2)
    xyz = np.array([r * s1 * c2, r * s1 * s2, r * c1])
    # columns: ∂/∂r, ∂/∂θ1, ∂/∂θ2
    jac = np.array(
        [
            [s1 * c2, r * c1 * c2, -r * s1 * s2],
            [s1 * s2, r * c1 * s2, r * s1 * c2],
            [c1, -r * s1, 0.0],
        ]
    )
    p_cart = np.linalg.solve(jac.T, x.p)
    return xyz, p_cart


def cartesian_hamiltonian_3d(alpha: float, beta: Sequence[float], xyz: np.ndarray, p_cart: np.ndarray) -> float:
    """|p|² + α|x|² + β1/z² + β2/x² + β3/y², the k = (1, 1) oscillator in Cartesian form."""
    x, y, z = xyz
    b1, b2, b3 = beta
    total = float(np.dot(p_cart, p_cart)) + alpha * float(np.dot(xyz, xyz))
    for coefficient, coordinate in ((b1, z), (b2, x), (b3, y)):
        if coefficient != 0.0:
            total += coefficient / coordinate**2
    return total
