"""Polynomial constants of motion assembled from hyperbolic pairs."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.autodiff import dual
from src.autodiff.bracket import NonFiniteError, Observable, bracket_from_gradients, chain_gradients, gradient
from src.chain.hamiltonian import chain_values
from src.chain.models import ChainSystem, PhasePoint
from src.utils.logging import get_logger

from .pairs import DEGENERATE_TOL, DegenerateInputError, LevelParts, compose, level_parts, rates

logger = get_logger(__name__)

DEFAULT_DMAX = 12
MAX_DMAX = 16
PROBE_LINES = 8
PROBE_TOL = 1e-9


@dataclass(frozen=True)
class ConstantParts:
    """Every derived quantity of the level constant, generic over scalars."""

    combo: tuple[int, int]
    cleared: Any
    numerator: Any
    reduced: Any
    denominator: Any = None
    raw: Any = None
    cosh: Any = None


@dataclass(frozen=True)
class PolyConstant:
    """Constant built from m𝓐_level − n𝓑_level at one phase point."""

    label: str
    level: int
    angle_combo: tuple[int, int]
    raw_value: complex
    denominator: complex
    numerator_value: complex
    reduced_value: complex
    measured_degree: int | None


def _numerators(parts: LevelParts) -> tuple[Any, Any, Any]:
    """(N, numerator, reduced) without touching the discriminants.

    Every term of N carries √L_{i+1} to a power of the parity of m + n + 1:
    for even m + n the numerator is N/√L, otherwise N itself, whose part
    free of L_{i+1} is a function of the chain constants alone.
    """
    m, n = parts.combo
    cleared = compose(parts.a.cleared, parts.b.cleared, m, n)[1]
    if (m + n) % 2 == 0:
        numerator = cleared / parts.sqrt_l
        return cleared, numerator, numerator
    residue = compose((0.0, parts.a.residue), (0.0, parts.b.residue), m, n)[1]
    return cleared, cleared, (cleared - residue) / parts.l_next


def constant_parts(
    system: ChainSystem, q: Sequence[Any], p: Sequence[Any], level: int, with_raw: bool = True
) -> ConstantParts:
    """Cleared numerator, reduced constant and (optionally) raw sinh value."""
    parts = level_parts(system, q, p, level)
    m, n = parts.combo
    cleared, numerator, reduced = _numerators(parts)
    if not with_raw:
        return ConstantParts(combo=parts.combo, cleared=cleared, numerator=numerator, reduced=reduced)

    for piece in (parts.a, parts.b):
        d2 = complex(dual.primal(piece.discriminant))
        if abs(d2) <= DEGENERATE_TOL * max(piece.scale, 1.0):
            raise DegenerateInputError(f"{piece.label}: vanishing discriminant {d2:.3e}", level=level)
    full = dual.csqrt(parts.a.discriminant) ** m * dual.csqrt(parts.b.discriminant) ** n
    cosh_cleared = compose(parts.a.cleared, parts.b.cleared, m, n)[0]
    denominator = full / parts.sqrt_l if (m + n) % 2 == 0 else full
    return ConstantParts(
        combo=parts.combo,
        cleared=cleared,
        numerator=numerator,
        reduced=reduced,
        denominator=denominator,
        raw=cleared / full,
        cosh=cosh_cleared / full,
    )


def _constant_observable(system: ChainSystem, level: int, attribute: str, label: str, with_raw: bool) -> Observable:
    def fn(q: Sequence[Any], p: Sequence[Any]) -> Any:
        return getattr(constant_parts(system, q, p, level, with_raw=with_raw), attribute)

    return Observable(fn=fn, label=label, declared_complex=True)


def raw_observable(system: ChainSystem, level: int) -> Observable:
    """sinh(m𝓐 − n𝓑) at ``level``."""
    return _constant_observable(system, level, "raw", f"sinh{level}", with_raw=True)


def numerator_observable(system: ChainSystem, level: int) -> Observable:
    return _constant_observable(system, level, "numerator", f"N{level}", with_raw=False)


def reduced_observable(system: ChainSystem, level: int) -> Observable:
    """Lower-degree polynomial constant of ``level``."""
    return _constant_observable(system, level, "reduced", f"L''{level}", with_raw=False)


def poly_constant(
    system: ChainSystem,
    x: PhasePoint,
    level: int,
    dmax: int = DEFAULT_DMAX,
    seed: int = 0,
    measure: bool = True,
) -> PolyConstant:
    """Assemble the level constant at x, optionally probing its degree in p."""
    parts = constant_parts(system, x.q, x.p, level)
    degree = degree_probe(reduced_observable(system, level), x.q, dmax=dmax, seed=seed) if measure else None
    constant = PolyConstant(
        label=f"L''{level}",
        level=level,
        angle_combo=parts.combo,
        raw_value=complex(parts.raw),
        denominator=complex(parts.denominator),
        numerator_value=complex(parts.numerator),
        reduced_value=complex(parts.reduced),
        measured_degree=degree,
    )
    logger.debug("poly_constant_built", level=level, combo=parts.combo, degree=degree)
    return constant


def poly_constants(system: ChainSystem, x: PhasePoint, **kwargs: Any) -> list[PolyConstant]:
    return [poly_constant(system, x, level, **kwargs) for level in range(1, system.n)]


def _line_degree(values: np.ndarray, dmax: int, tol: float) -> int | None:
    """Degree read off normalized forward differences of equally spaced samples."""
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return 0
    ratios = []
    diffs = values
    for order in range(dmax + 2):
        if order:
            diffs = np.diff(diffs)
        ratios.append(float(np.max(np.abs(diffs))) / (2.0**order * scale))
    if ratios[-1] > tol:
        return None
    degree = dmax
    while degree >= 0 and ratios[degree] <= tol:
        degree -= 1
    return max(degree, 0)


def degree_probe(
    f: Observable | Callable[[Sequence[Any], Sequence[Any]], Any],
    q: Sequence[float],
    dmax: int = DEFAULT_DMAX,
    lines: int = PROBE_LINES,
    seed: int = 0,
    tol: float = PROBE_TOL,
    span: float = 2.0,
) -> int | None:
    """Polynomial degree of f(q, ·) in the momenta, or None when it exceeds dmax.

    Samples dmax + 2 equally spaced points on each of ``lines`` random momentum
    lines p0 + t·u, t ∈ [−span, span] shifted by a random offset.
    """
    if not 0 <= dmax <= MAX_DMAX:
        raise ValueError(f"dmax must lie in [0, {MAX_DMAX}], got {dmax}")
    q = np.asarray(q, dtype=float)
    n = len(q)
    rng = np.random.default_rng([seed, n, dmax])
    worst = 0
    for _ in range(lines):
        p0 = rng.uniform(-1.0, 1.0, size=n)
        u = rng.normal(size=n)
        u /= np.linalg.norm(u)
        t = rng.uniform(-0.25, 0.25) + np.linspace(-span, span, dmax + 2)
        values = np.array([complex(f(q, p0 + tj * u)) for tj in t])
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("degree probe hit a non-finite value")
        degree = _line_degree(values, dmax, tol)
        if degree is None:
            return None
        worst = max(worst, degree)
    return worst


def angle_brackets(system: ChainSystem, x: PhasePoint) -> np.ndarray:
    """(n, n−1) matrix of {L_j, L'_i}, the brackets with the angle variables.

    L'_i is recovered from sinh X_i without inverting it:
    {L_j, L'_i} = {L_j, sinh X_i} / cosh X_i / (4 num(k_{i-1}) num(k_i) √−L_{i+1}).
    Expected value −δ_{j,i+1} on principal branches.
    """
    n = system.n
    chain_rows = chain_gradients(system, x)
    values = chain_values(system, x.q, x.p)
    ks = rates(system)
    out = np.zeros((n, n - 1), dtype=complex)
    for level in range(1, n):
        parts = constant_parts(system, x.q, x.p, level)
        grad_raw = gradient(raw_observable(system, level), x)
        scale = 4 * ks[level - 1].num * ks[level].num * dual.csqrt(-values[level])
        for j in range(n):
            out[j, level - 1] = bracket_from_gradients(chain_rows[j], grad_raw) / complex(parts.cosh) / scale
    return out
