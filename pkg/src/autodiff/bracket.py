"""Poisson brackets, involution and functional-independence checks.

Bracket convention used throughout:

    {F, G} = Σ_i ∂F/∂p_i ∂G/∂q_i − ∂F/∂q_i ∂G/∂p_i

so that {p, q} = +1 and {H, F} = dF/dt along the flow of H.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.chain.hamiltonian import ChainError, chain_values
from src.chain.models import ChainSystem, PhasePoint
from src.utils.logging import get_logger

from . import dual

logger = get_logger(__name__)

# f(q, p) -> scalar, generic over floats and duals
PhaseFunction = Callable[[Sequence[Any], Sequence[Any]], Any]


class NonFiniteError(ChainError):
    """Observable or one of its derivatives evaluated to inf/nan."""

    pass


@dataclass(frozen=True)
class Observable:
    """Scalar phase-space function with a label."""

    fn: PhaseFunction
    label: str
    declared_complex: bool = False

    def __call__(self, q: Sequence[Any], p: Sequence[Any]) -> Any:
        return self.fn(q, p)

    def evaluate(self, x: PhasePoint) -> Any:
        value = self.fn(x.q, x.p)
        return complex(value) if self.declared_complex else float(np.real(value))


def _grad_dtype(f: Observable) -> type:
    return complex if f.declared_complex else float


def gradient(f: Observable, x: PhasePoint) -> np.ndarray:
    """(∂f/∂q, ∂f/∂p) from a single vector-mode dual evaluation."""
    n = x.n
    seeded = dual.seed_vector(x.as_vector())
    result = f(seeded[:n], seeded[n:])
    if isinstance(result, dual.Dual):
        grad = np.asarray(result.eps)
        value = result.val
    else:
        grad = np.zeros(2 * n)
        value = result
    if not f.declared_complex and np.iscomplexobj(grad):
        grad = grad.real
    grad = grad.astype(_grad_dtype(f))
    if not (np.all(np.isfinite(grad)) and np.isfinite(value)):
        raise NonFiniteError(f"{f.label}: non-finite value or derivative")
    return grad


def finite_difference_gradient(f: Observable, x: PhasePoint, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, used as an independent oracle."""
    base = x.as_vector()
    n = x.n
    grad = np.zeros(2 * n, dtype=_grad_dtype(f))
    for j in range(2 * n):
        h = step * max(1.0, abs(base[j]))
        up, down = base.copy(), base.copy()
        up[j] += h
        down[j] -= h
        grad[j] = (f(up[:n], up[n:]) - f(down[:n], down[n:])) / (2 * h)
    return grad


def bracket_from_gradients(grad_f: np.ndarray, grad_g: np.ndarray) -> Any:
    """{F, G} given both gradients; swapping the arguments negates the result exactly."""
    n = len(grad_f) // 2
    return np.sum(grad_f[n:] * grad_g[:n]) - np.sum(grad_f[:n] * grad_g[n:])


def poisson_bracket(f: Observable, g: Observable, x: PhasePoint) -> Any:
    """{f, g} at x."""
    return bracket_from_gradients(gradient(f, x), gradient(g, x))


def normalized_bracket(f: Observable, g: Observable, x: PhasePoint) -> float:
    """|{f, g}| / (‖∇f‖ ‖∇g‖); zero when either gradient vanishes."""
    grad_f, grad_g = gradient(f, x), gradient(g, x)
    return _normalized(grad_f, grad_g)


def _normalized(grad_f: np.ndarray, grad_g: np.ndarray) -> float:
    scale = float(np.linalg.norm(grad_f) * np.linalg.norm(grad_g))
    if scale == 0.0:
        return 0.0
    return float(abs(bracket_from_gradients(grad_f, grad_g))) / scale


def directional_derivative(f: Observable, q: Sequence[Any], p: Sequence[Any], slot: int) -> Any:
    """∂f/∂z_slot for generic (possibly already dual) inputs, z = (q, p)."""
    n = len(q)
    z = list(q) + list(p)
    seeded = [dual.Dual(value, 1.0 if j == slot else 0.0) for j, value in enumerate(z)]
    result = f(seeded[:n], seeded[n:])
    return result.eps if isinstance(result, dual.Dual) else 0.0


def bracket_observable(f: Observable, g: Observable) -> Observable:
    """{f, g} as an observable of its own, differentiable once more.

    Gradients of f and g are taken slot by slot on top of whatever scalar type
    the caller passes in, so ``gradient(bracket_observable(f, g), x)`` nests
    two levels of duals.
    """

    def fn(q: Sequence[Any], p: Sequence[Any]) -> Any:
        n = len(q)
        total: Any = 0.0
        for i in range(n):
            total = total + directional_derivative(f, q, p, n + i) * directional_derivative(g, q, p, i)
            total = total - directional_derivative(f, q, p, i) * directional_derivative(g, q, p, n + i)
        return total

    return Observable(
        fn=fn,
        label=f"{{{f.label},{g.label}}}",
        declared_complex=f.declared_complex or g.declared_complex,
    )


def product_observable(f: Observable, g: Observable) -> Observable:
    return Observable(
        fn=lambda q, p: f(q, p) * g(q, p),
        label=f"{f.label}*{g.label}",
        declared_complex=f.declared_complex or g.declared_complex,
    )


def chain_observable(system: ChainSystem, index: int) -> Observable:
    """L_index (1-based; L_1 = H)."""
    if not 1 <= index <= system.n:
        raise ValueError(f"level {index} outside 1..{system.n}")
    return Observable(fn=lambda q, p: chain_values(system, q, p)[index - 1], label=f"L{index}")


def chain_observables(system: ChainSystem) -> list[Observable]:
    return [chain_observable(system, i) for i in range(1, system.n + 1)]


def momentum_observable(index: int) -> Observable:
    """p_index (1-based)."""
    return Observable(fn=lambda q, p: p[index - 1], label=f"p{index}")


def coordinate_observable(index: int) -> Observable:
    """q_index (1-based)."""
    return Observable(fn=lambda q, p: q[index - 1], label=f"q{index}")


def chain_gradients(system: ChainSystem, x: PhasePoint) -> np.ndarray:
    """(n, 2n) gradients of L_1 … L_n from one dual pass through the recursion."""
    n = system.n
    seeded = dual.seed_vector(x.as_vector())
    values = chain_values(system, seeded[:n], seeded[n:])
    rows = np.zeros((n, 2 * n))
    for i, value in enumerate(values):
        if isinstance(value, dual.Dual):
            rows[i] = np.asarray(value.eps, dtype=float)
    if not np.all(np.isfinite(rows)):
        raise NonFiniteError("non-finite chain gradient")
    return rows


def involution_matrix(system: ChainSystem, points: Sequence[PhasePoint]) -> np.ndarray:
    """Worst normalized |{L_i, L_j}| over the points."""
    if not points:
        raise ValueError("involution_matrix needs at least one point")
    n = system.n
    worst = np.zeros((n, n))
    for x in points:
        rows = chain_gradients(system, x)
        for i in range(n):
            for j in range(i + 1, n):
                value = _normalized(rows[i], rows[j])
                worst[i, j] = max(worst[i, j], value)
                worst[j, i] = worst[i, j]
    logger.debug("involution_matrix_computed", n=n, points=len(points), worst=float(worst.max()))
    return worst


@dataclass
class RankReport:
    """Result of a numerical rank test over several points."""

    rank: int
    singular_values: list[float] = field(default_factory=list)
    point_ranks: list[int] = field(default_factory=list)
    best_point: int = 0


def gradient_matrix(fs: Sequence[Observable], x: PhasePoint) -> np.ndarray:
    rows = [gradient(f, x) for f in fs]
    dtype = complex if any(np.iscomplexobj(r) for r in rows) else float
    return np.array(rows, dtype=dtype)


def independence_rank(fs: Sequence[Observable], points: Sequence[PhasePoint], tol: float = 1e-8) -> RankReport:
    """Numerical rank of the stacked, row-normalized gradient matrix, maximized over points."""
    if not points:
        raise ValueError("independence_rank needs at least one point")
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    report = RankReport(rank=0)
    for index, x in enumerate(points):
        matrix = gradient_matrix(fs, x)
        norms = np.linalg.norm(matrix, axis=1)
        matrix = matrix / np.where(norms > 0, norms, 1.0)[:, None]
        sigma = np.linalg.svd(matrix, compute_uv=False)
        rank = int(np.sum(sigma > tol * sigma[0])) if sigma.size and sigma[0] > 0 else 0
        report.point_ranks.append(rank)
        if rank > report.rank or index == 0:
            report.rank = rank
            report.singular_values = [float(s) for s in sigma]
            report.best_point = index
    logger.debug("independence_rank_computed", observables=len(fs), rank=report.rank)
    return report
