"""Closed-form constants of the four-level oscillator chain with k = (2, 1, 1).

The chain reads

    L4 = p_θ3² + β3/cos²θ3 + β4/sin²θ3
    L3 = p_θ2² + β2/cos²θ2 + L4/sin²θ2
    L2 = p_θ1² + β1/cos²(2θ1) + L3/sin²(2θ1)
    H  = p_r² + α r² + L2/r²

Each level has a displayed sinh quotient and a lower-degree polynomial
constant. Where the printed form of a formula is ambiguous or inconsistent,
every reading is kept as a named variant; ``resolve_closed_forms`` measures
each variant against the composed hyperbolic pairs and the bracket with H and
accepts the ones that agree.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from src.autodiff import dual
from src.autodiff.bracket import Observable, chain_observable, normalized_bracket
from src.chain.hamiltonian import UnsupportedSystemError, angular_parameters, chain_values
from src.chain.models import ChainSystem, PhasePoint, PotentialKind
from src.utils.logging import get_logger

from .pairs import angular_coefficients, radial_kind
from .poly import constant_parts, degree_probe

logger = get_logger(__name__)

DISPLAY_VARIANTS: dict[int, tuple[str, ...]] = {1: ("printed",), 2: ("printed", "rescaled"), 3: ("printed",)}
CONSTANT_VARIANTS: dict[int, tuple[str, ...]] = {
    1: ("printed", "corrected"),
    2: ("additive", "factored"),
    3: ("printed",),
}


@dataclass(frozen=True)
class _Frame:
    """Everything the closed forms refer to, generic over scalars."""

    r: Any
    t1: Any
    t2: Any
    t3: Any
    pr: Any
    p1: Any
    p2: Any
    p3: Any
    H: Any
    L2: Any
    L3: Any
    L4: Any
    alpha: float
    b1: float
    b2: float
    b3: float
    b4: float


def is_four_d_example(system: ChainSystem) -> bool:
    if system.n != 4:
        return False
    try:
        ks = angular_parameters(system)
        kind, _ = radial_kind(system)
    except UnsupportedSystemError:
        return False
    return kind == PotentialKind.HARMONIC_RADIAL and [str(k) for k in ks] == ["2", "1", "1"]


def _frame(system: ChainSystem, q: Sequence[Any], p: Sequence[Any]) -> _Frame:
    if not is_four_d_example(system):
        raise UnsupportedSystemError("closed forms exist only for the n=4 oscillator chain with k=(2,1,1)")
    H, L2, L3, L4 = chain_values(system, q, p)
    b1, _ = angular_coefficients(system, 2)
    b2, _ = angular_coefficients(system, 3)
    b3, b4 = angular_coefficients(system, 4)
    return _Frame(
        r=q[0], t1=q[1], t2=q[2], t3=q[3],
        pr=p[0], p1=p[1], p2=p[2], p3=p[3],
        H=H, L2=L2, L3=L3, L4=L4,
        alpha=radial_kind(system)[1], b1=b1, b2=b2, b3=b3, b4=b4,
    )


def _level2_terms(f: _Frame) -> tuple[Any, Any, Any, Any]:
    """(P, Q, S_B, D_A²) shared by the level-2 display and constant."""
    s2t2 = dual.sin(2 * f.t2)
    cot2t1 = dual.cos(2 * f.t1) / dual.sin(2 * f.t1)
    csc2 = 1.0 / dual.sin(2 * f.t1) ** 2
    s_b = 2 * f.L3 * csc2 + f.b1 - f.L2 - f.L3
    big_p = (f.L3 * dual.cos(2 * f.t2) + f.L4 - f.b2) * cot2t1 * s2t2 * f.p1 * f.p2
    big_q = s2t2**2 * s_b * f.p2**2
    d_a2 = (f.b2 - f.L3 - f.L4) ** 2 - 4 * f.L3 * f.L4
    return big_p, big_q, s_b, d_a2


def sinh_display(system: ChainSystem, q: Sequence[Any], p: Sequence[Any], level: int, variant: str = "printed") -> Any:
    """Displayed quotient for sinh of the level's angle combination."""
    _check_variant(DISPLAY_VARIANTS, level, variant)
    f = _frame(system, q, p)
    if level == 1:
        disc_b = f.H**2 - 4 * f.alpha * f.L2
        bracket = f.L2 * dual.cos(4 * f.t1) + f.L3 - f.b1
        num = 4j * f.L2 * (
            (f.H - 2 * f.L2 / f.r**2) * dual.sin(4 * f.t1) / f.r * f.p1 * f.pr + 2 * bracket / f.r**2 * f.pr**2
        ) - 1j * disc_b * bracket
        return num / (disc_b * dual.csqrt((f.b1 - f.L2 - f.L3) ** 2 - 4 * f.L2 * f.L3))
    if level == 2:
        big_p, big_q, s_b, d_a2 = _level2_terms(f)
        factor = 2.0 if variant == "rescaled" else 1.0
        num = factor * f.L3 * (2 * big_p - big_q) + d_a2 * s_b
        return num / (d_a2 * dual.csqrt(4 * f.b1 * f.L2 - (f.L3 - f.L2 - f.b1) ** 2))
    den = dual.csqrt(4 * f.b2 * f.L3 - (f.L4 - f.L3 - f.b2) ** 2) * dual.csqrt(
        (f.b3 - f.b4 - f.L4) ** 2 - 4 * f.b4 * f.L4
    )
    return dual.csqrt(f.L4) * _level3_constant(f) / den


def _level3_constant(f: _Frame) -> Any:
    cot = dual.cos(f.t2) / dual.sin(f.t2)
    return (
        2 * (f.L4 * dual.cos(2 * f.t3) + f.b4 - f.b3) * cot * f.p2
        - (2 * f.L4 / dual.sin(f.t2) ** 2 + f.b2 - f.L3 - f.L4) * dual.sin(2 * f.t3) * f.p3
    )


def closed_form_constant(
    system: ChainSystem, q: Sequence[Any], p: Sequence[Any], level: int, variant: str
) -> Any:
    """Lower-degree polynomial constant of the level, in the requested reading."""
    _check_variant(CONSTANT_VARIANTS, level, variant)
    f = _frame(system, q, p)
    if level == 1:
        # printed reading halves the angles and drops the 4 in front of αL2
        angle, weight = (2, 1.0) if variant == "printed" else (4, 4.0)
        return (
            (f.H - 2 * f.L2 / f.r**2) * dual.sin(angle * f.t1) / f.r * f.p1 * f.pr
            + 2 * (f.L2 * dual.cos(angle * f.t1) + f.L3 - f.b1) / f.r**2 * f.pr**2
            - 0.25 * (f.H**2 - weight * f.alpha * f.L2) * dual.cos(4 * f.t1)
        )
    if level == 2:
        big_p, big_q, s_b, d_a2 = _level2_terms(f)
        csc2 = 1.0 / dual.sin(2 * f.t1) ** 2
        if variant == "additive":
            return 2 * big_p - big_q + d_a2 * csc2
        return 2 * big_p + (d_a2 * csc2 - dual.sin(2 * f.t2) ** 2 * s_b) * f.p2**2
    return _level3_constant(f)


def constant_identity(
    system: ChainSystem, q: Sequence[Any], p: Sequence[Any], level: int, variant: str
) -> tuple[Any, Any]:
    """(composed numerator, the same numerator rebuilt from the closed-form constant)."""
    f = _frame(system, q, p)
    numerator = constant_parts(system, q, p, level, with_raw=False).numerator
    lpp = closed_form_constant(system, q, p, level, variant)
    if level == 1:
        tail = f.H**2 if variant == "printed" else f.H**2 - 4 * f.alpha * f.L2
        return numerator, 4j * f.L2 * lpp - 1j * tail * (f.L3 - f.b1)
    if level == 2:
        d_a2 = (f.b2 - f.L3 - f.L4) ** 2 - 4 * f.L3 * f.L4
        return numerator, 2 * f.L3 * lpp + d_a2 * (f.b1 - f.L2 - f.L3)
    return numerator, lpp


def closed_form_observable(system: ChainSystem, level: int, variant: str) -> Observable:
    return Observable(
        fn=lambda q, p: closed_form_constant(system, q, p, level, variant),
        label=f"L''{level}[{variant}]",
    )


def _check_variant(table: dict[int, tuple[str, ...]], level: int, variant: str) -> None:
    if level not in table:
        raise UnsupportedSystemError(f"no closed form at level {level}", level=level)
    if variant not in table[level]:
        raise ValueError(f"level {level} has variants {table[level]}, not {variant!r}")


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-12)


@dataclass
class VariantResidual:
    residual: float
    commute: float | None = None
    accepted: bool = False


@dataclass
class FormulaCheck:
    """Residuals of every reading of one displayed formula."""

    name: str
    level: int
    variants: dict[str, VariantResidual] = field(default_factory=dict)

    @property
    def accepted(self) -> list[str]:
        return [name for name, v in self.variants.items() if v.accepted]

    @property
    def ok(self) -> bool:
        return bool(self.accepted)


def resolve_closed_forms(
    system: ChainSystem,
    points: Sequence[PhasePoint],
    tol: float = 1e-9,
    commute_tol: float = 1e-8,
) -> list[FormulaCheck]:
    """Check every display and constant reading at the given points."""
    if not points:
        raise ValueError("resolve_closed_forms needs at least one point")
    checks: list[FormulaCheck] = []
    hamiltonian = chain_observable(system, 1)

    for level, variants in DISPLAY_VARIANTS.items():
        check = FormulaCheck(name=f"sinh{level}", level=level)
        for variant in variants:
            worst = 0.0
            for x in points:
                composed = complex(constant_parts(system, x.q, x.p, level).raw)
                shown = complex(sinh_display(system, x.q, x.p, level, variant))
                worst = max(worst, _relative(shown, composed))
            check.variants[variant] = VariantResidual(residual=worst, accepted=worst <= tol)
        checks.append(check)

    for level, variants in CONSTANT_VARIANTS.items():
        check = FormulaCheck(name=f"L''{level}", level=level)
        for variant in variants:
            worst = commute = 0.0
            observable = closed_form_observable(system, level, variant)
            for x in points:
                lhs, rhs = constant_identity(system, x.q, x.p, level, variant)
                worst = max(worst, _relative(complex(rhs), complex(lhs)))
                commute = max(commute, normalized_bracket(hamiltonian, observable, x))
            check.variants[variant] = VariantResidual(
                residual=worst, commute=commute, accepted=worst <= tol and commute <= commute_tol
            )
        checks.append(check)

    for check in checks:
        logger.info(
            "closed_form_checked",
            formula=check.name,
            accepted=check.accepted,
            residuals={name: v.residual for name, v in check.variants.items()},
        )
    return checks


def closed_form_degrees(system: ChainSystem, x: PhasePoint, dmax: int = 12, seed: int = 0) -> dict[str, int | None]:
    """Measured degree of every closed-form constant reading."""
    return {
        f"L''{level}[{variant}]": degree_probe(closed_form_observable(system, level, variant), x.q, dmax=dmax, seed=seed)
        for level, variants in CONSTANT_VARIANTS.items()
        for variant in variants
    }
