"""Hyperbolic pairs (cosh X, sinh X) and their construction from chain data.

Angles X = 𝓐_i, 𝓑_i are never formed explicitly: each is carried as the pair
of its hyperbolic functions and integer combinations m𝓐 − n𝓑 are built with
the addition formulas. For every pair the components are produced "cleared"
as (C, S) = D·(cosh X, sinh X) with D² a function of the chain constants, so
that C and S are polynomial in the momenta.

Level i (1 <= i < n) pairs 𝓐_i, built on the coordinate q_{i+1} = θ_i, with
𝓑_i, built on q_i (the radial coordinate for i = 1). Both advance at rates
proportional to k_i and k_{i-1} respectively, with k_0 = 1 for a harmonic and
1/2 for a Kepler radial level.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from src.autodiff import dual
from src.chain.hamiltonian import ChainError, UnsupportedSystemError, angular_parameters, chain_values
from src.chain.models import ChainSystem, PhasePoint, PotentialKind, RationalParam

INVARIANT_TOL = 1e-8
DEGENERATE_TOL = 1e-12
MAX_COMBO = 64

# generic (c, s) or cleared (C, S) pair of any scalar type
RawPair = tuple[Any, Any]


class DegenerateInputError(ChainError):
    """A discriminant vanishes (degenerate orbit); the pair is undefined."""

    pass


class PairInvariantError(ChainError):
    """cosh² − sinh² differs from 1 beyond tolerance."""

    pass


@dataclass(frozen=True)
class HypPair:
    """(cosh X, sinh X) for a complex angle X."""

    c: complex
    s: complex

    @classmethod
    def identity(cls) -> "HypPair":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def from_angle(cls, x: complex) -> "HypPair":
        return cls(complex(np.cosh(x)), complex(np.sinh(x)))

    def inverse(self) -> "HypPair":
        return HypPair(self.c, -self.s)

    @property
    def residual(self) -> float:
        """Relative violation of c² − s² = 1."""
        scale = max(1.0, abs(self.c) ** 2, abs(self.s) ** 2)
        return abs(self.c * self.c - self.s * self.s - 1.0) / scale

    def check(self, tol: float = INVARIANT_TOL) -> "HypPair":
        if not self.residual <= tol:
            raise PairInvariantError(f"cosh²-sinh²-1 off by {self.residual:.3e}")
        return self


def _mul(a: RawPair, b: RawPair) -> RawPair:
    return a[0] * b[0] + a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _pow(a: RawPair, n: int) -> RawPair:
    """n-fold product by repeated squaring; negative n through (c, −s)."""
    if n < 0:
        a, n = (a[0], -a[1]), -n
    result: RawPair = (1.0, 0.0)
    base = a
    first = True
    while n:
        if n & 1:
            result = base if first else _mul(result, base)
            first = False
        n >>= 1
        if n:
            base = _mul(base, base)
    return result


def compose(a: RawPair, b: RawPair, m: int, n: int) -> RawPair:
    """Pair of m·A − n·B.

    Homogeneous of degree (m, n) in the two arguments, so it applies unchanged
    to cleared pairs.
    """
    return _mul(_pow(a, m), _pow(b, -n))


def hyp_mul(a: HypPair, b: HypPair) -> HypPair:
    a.check()
    b.check()
    c, s = _mul((a.c, a.s), (b.c, b.s))
    return HypPair(complex(c), complex(s))


def hyp_pow(a: HypPair, n: int) -> HypPair:
    a.check()
    c, s = _pow((a.c, a.s), int(n))
    return HypPair(complex(c), complex(s))


@dataclass(frozen=True)
class PairParts:
    """Cleared pair (C, S) with S's constant part and the discriminant D²."""

    label: str
    cleared: RawPair
    residue: Any
    discriminant: Any
    scale: float

    def normalized(self, level: int) -> HypPair:
        d2 = complex(dual.primal(self.discriminant))
        if abs(d2) <= DEGENERATE_TOL * max(self.scale, 1.0):
            raise DegenerateInputError(f"{self.label}: vanishing discriminant {d2:.3e}", level=level)
        d = dual.csqrt(d2)
        return HypPair(complex(dual.primal(self.cleared[0])) / d, complex(dual.primal(self.cleared[1])) / d)


@dataclass(frozen=True)
class LevelParts:
    level: int
    a: PairParts
    b: PairParts
    sqrt_l: Any
    l_next: Any
    combo: tuple[int, int]


def radial_kind(system: ChainSystem) -> tuple[PotentialKind, float]:
    """Kind and coefficient of the level-1 radial term (harmonic with α = 0 when absent)."""
    present = [t for t in system.level(1).potential if t.kind != PotentialKind.ZERO]
    kinds = {t.kind for t in present if not t.is_absent}
    if len(kinds) > 1:
        raise UnsupportedSystemError("level 1 mixes harmonic and Kepler terms", level=1)
    if not present:
        return PotentialKind.HARMONIC_RADIAL, 0.0
    kind = next(iter(kinds)) if kinds else present[0].kind
    alpha = sum(t.coefficient for t in present if t.kind == kind)
    return kind, alpha


def base_rate(system: ChainSystem) -> RationalParam:
    """k_0: 1 for a harmonic radial level, 1/2 for a Kepler one."""
    kind, _ = radial_kind(system)
    return RationalParam(num=1, den=2) if kind == PotentialKind.KEPLER_RADIAL else RationalParam(num=1)


def rates(system: ChainSystem) -> list[RationalParam]:
    """[k_0, k_1, …, k_{n-1}]."""
    return [base_rate(system), *angular_parameters(system)]


def angle_combo(system: ChainSystem, level: int) -> tuple[int, int]:
    """Integers (m, n) with m·k_level = n·k_{level-1}; m𝓐 − n𝓑 is conserved."""
    _check_level(system, level)
    ks = rates(system)
    prev, cur = ks[level - 1], ks[level]
    m, n = prev.num * cur.den, prev.den * cur.num
    if m > MAX_COMBO or n > MAX_COMBO:
        raise UnsupportedSystemError(f"angle combination ({m}, {n}) exceeds {MAX_COMBO}", level=level)
    return m, n


def _check_level(system: ChainSystem, level: int) -> None:
    if not 1 <= level < system.n:
        raise UnsupportedSystemError(f"no constant at level {level} for n={system.n}", level=level)


def angular_coefficients(system: ChainSystem, index: int) -> tuple[float, float]:
    """(a, b) of a/cos²(kθ) + b/sin²(kθ) at chain level ``index`` >= 2."""
    a = b = 0.0
    for term in system.level(index).potential:
        if term.kind == PotentialKind.INV_COS_SQ:
            a += term.coefficient
        elif term.kind == PotentialKind.INV_SIN_SQ:
            b += term.coefficient
        elif term.kind != PotentialKind.ZERO:
            raise UnsupportedSystemError(f"level {index}: no pair for {term.kind.value}", level=index)
    return a, b


def _magnitude(x: Any) -> float:
    return float(abs(complex(dual.primal(x))))


def _angular_a(label: str, x: Any, p: Any, k: float, big_l: Any, sqrt_l: Any, a: float, b: Any) -> PairParts:
    arg = 2 * k * x
    cos2, sin2 = dual.cos(arg), dual.sin(arg)
    first, second = (a - big_l - b) ** 2, 4 * big_l * b
    return PairParts(
        label=label,
        cleared=(sqrt_l * sin2 * p, 1j * (big_l * cos2 + b - a)),
        residue=1j * (b - a),
        discriminant=first - second,
        scale=_magnitude(first) + _magnitude(second),
    )


def _angular_b(label: str, x: Any, p: Any, k: float, l_here: Any, big_l: Any, sqrt_l: Any, a: float) -> PairParts:
    s, c = dual.sin(k * x), dual.cos(k * x)
    first, second = 4 * a * l_here, (big_l - l_here - a) ** 2
    return PairParts(
        label=label,
        cleared=(-2j * sqrt_l * (c / s) * p, 2 * big_l / (s * s) + a - l_here - big_l),
        residue=a - l_here,
        discriminant=first - second,
        scale=_magnitude(first) + _magnitude(second),
    )


def _radial_b(system: ChainSystem, r: Any, pr: Any, h: Any, big_l: Any, sqrt_l: Any) -> PairParts:
    kind, alpha = radial_kind(system)
    if kind == PotentialKind.KEPLER_RADIAL:
        first, second = alpha * alpha, 4 * h * big_l
        return PairParts(
            label="B1",
            cleared=(2 * sqrt_l * pr, 1j * (alpha + 2 * big_l / r)),
            residue=1j * alpha,
            discriminant=first + second,
            scale=_magnitude(first) + _magnitude(second),
        )
    first, second = h * h, 4 * alpha * big_l
    return PairParts(
        label="B1",
        cleared=(-2 * sqrt_l * pr / r, 1j * (h - 2 * big_l / (r * r))),
        residue=1j * h,
        discriminant=first - second,
        scale=_magnitude(first) + _magnitude(second),
    )


def level_parts(system: ChainSystem, q: Any, p: Any, level: int, values: list[Any] | None = None) -> LevelParts:
    """Cleared 𝓐_level, 𝓑_level for generic scalars."""
    _check_level(system, level)
    n = system.n
    if values is None:
        values = chain_values(system, q, p)
    ks = angular_parameters(system)
    big_l = values[level]
    sqrt_l = dual.csqrt(big_l)

    j = level + 1
    a_coef, b_coef = angular_coefficients(system, j)
    b_total = b_coef + values[j] if j < n else b_coef
    part_a = _angular_a(f"A{level}", q[level], p[level], ks[level - 1].value, big_l, sqrt_l, a_coef, b_total)

    if level == 1:
        part_b = _radial_b(system, q[0], p[0], values[0], big_l, sqrt_l)
    else:
        a_here, b_here = angular_coefficients(system, level)
        if b_here != 0.0:
            raise UnsupportedSystemError(f"level {level}: 1/sin² potential on a coupled level", level=level)
        part_b = _angular_b(
            f"B{level}", q[level - 1], p[level - 1], ks[level - 2].value, values[level - 1], big_l, sqrt_l, a_here
        )
    return LevelParts(level=level, a=part_a, b=part_b, sqrt_l=sqrt_l, l_next=big_l, combo=angle_combo(system, level))


def level_pairs(system: ChainSystem, x: PhasePoint) -> list[tuple[HypPair, HypPair]]:
    """[(𝓐_i, 𝓑_i) for i = 1 … n−1] at a phase point."""
    values = chain_values(system, x.q, x.p)
    pairs = []
    for level in range(1, system.n):
        parts = level_parts(system, x.q, x.p, level, values)
        pairs.append((parts.a.normalized(level), parts.b.normalized(level)))
    return pairs


def _require(system: ChainSystem, n: int, kind: PotentialKind | None, name: str) -> None:
    if system.n != n:
        raise UnsupportedSystemError(f"{name} needs an n={n} chain, got n={system.n}")
    if kind is not None and radial_kind(system)[0] != kind:
        raise UnsupportedSystemError(f"{name} needs a {kind.value} radial term")


def pairs_oscillator3d(system: ChainSystem, x: PhasePoint) -> tuple[HypPair, HypPair, HypPair, HypPair]:
    """(𝓑1, 𝓐1, 𝓑2, 𝓐2) of the 3D generalized oscillator."""
    _require(system, 3, PotentialKind.HARMONIC_RADIAL, "pairs_oscillator3d")
    (a1, b1), (a2, b2) = level_pairs(system, x)
    return b1, a1, b2, a2


def pair_radial_kepler(system: ChainSystem, x: PhasePoint) -> HypPair:
    """𝓑1 of a Kepler-Coulomb chain."""
    if radial_kind(system)[0] != PotentialKind.KEPLER_RADIAL:
        raise UnsupportedSystemError("pair_radial_kepler needs a kepler_radial term")
    return level_parts(system, x.q, x.p, 1).b.normalized(1)


def pairs_4d_example(
    system: ChainSystem, x: PhasePoint
) -> tuple[HypPair, HypPair, HypPair, HypPair, HypPair, HypPair]:
    """(𝓑1, 𝓐1, 𝓑2, 𝓐2, 𝓑3, 𝓐3) of a four-level oscillator chain."""
    _require(system, 4, PotentialKind.HARMONIC_RADIAL, "pairs_4d_example")
    (a1, b1), (a2, b2), (a3, b3) = level_pairs(system, x)
    return b1, a1, b2, a2, b3, a3
