"""Forward-mode dual numbers.

A ``Dual`` carries a value and a first-order perturbation. The perturbation may
be a numpy vector (one evaluation yields a full gradient) or another ``Dual``
(nested duals give higher derivatives). All inputs of one evaluation must be
seeded at the same nesting depth.
"""

from typing import Any

import numpy as np


class Dual:
    """Value plus nilpotent perturbation: val + eps·ε with ε² = 0."""

    __slots__ = ("val", "eps")

    # numpy scalars must defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, val: Any, eps: Any) -> None:
        self.val = val
        self.eps = eps

    def __repr__(self) -> str:
        return f"Dual({self.val!r}, {self.eps!r})"

    def __add__(self, other: Any) -> "Dual":
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Dual":
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.eps - other.eps)
        return Dual(self.val - other, self.eps)

    def __rsub__(self, other: Any) -> "Dual":
        return Dual(other - self.val, -self.eps)

    def __neg__(self) -> "Dual":
        return Dual(-self.val, -self.eps)

    def __pos__(self) -> "Dual":
        return self

    def __mul__(self, other: Any) -> "Dual":
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.eps + self.eps * other.val)
        return Dual(self.val * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Dual":
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            quotient = self.val * inv
            return Dual(quotient, (self.eps - quotient * other.eps) * inv)
        return Dual(self.val / other, self.eps / other)

    def __rtruediv__(self, other: Any) -> "Dual":
        inv = 1.0 / self.val
        return Dual(other * inv, -other * inv * inv * self.eps)

    def __pow__(self, exponent: Any) -> "Dual":
        if isinstance(exponent, Dual):
            raise TypeError("dual exponents are not supported")
        if exponent == 0:
            return Dual(self.val**0, self.eps * 0)
        if exponent == 1:
            return self
        if exponent == 2:
            return Dual(self.val * self.val, 2 * self.val * self.eps)
        return Dual(self.val**exponent, exponent * self.val ** (exponent - 1) * self.eps)


def primal(x: Any) -> Any:
    """Innermost value of a (possibly nested) dual."""
    while isinstance(x, Dual):
        x = x.val
    return x


def sin(x: Any) -> Any:
    if isinstance(x, Dual):
        return Dual(sin(x.val), cos(x.val) * x.eps)
    return np.sin(x)


def cos(x: Any) -> Any:
    if isinstance(x, Dual):
        return Dual(cos(x.val), -sin(x.val) * x.eps)
    return np.cos(x)


def sqrt(x: Any) -> Any:
    """Real square root; the argument must be non-negative."""
    if isinstance(x, Dual):
        root = sqrt(x.val)
        return Dual(root, x.eps / (2 * root))
    return np.sqrt(x)


def csqrt(x: Any) -> Any:
    """Principal complex square root (cut along the negative real axis)."""
    if isinstance(x, Dual):
        root = csqrt(x.val)
        return Dual(root, x.eps / (2 * root))
    if isinstance(x, (int, float, np.integer, np.floating)):
        # +0j keeps negative reals on the upper side of the cut
        return np.sqrt(complex(float(x), 0.0))
    return np.sqrt(complex(x))


def seed_vector(values: np.ndarray) -> list[Dual]:
    """Seed every entry of ``values`` along its own unit direction."""
    size = len(values)
    basis = np.eye(size)
    return [Dual(float(values[i]), basis[i]) for i in range(size)]


def seed_nested(values: np.ndarray, directions: tuple[int, ...]) -> list[Any]:
    """Seed coordinates for mixed partials along ``directions``.

    The result of an evaluation ``f`` exposes ∂_{d0} via ``f.eps``,
    ∂_{d0}∂_{d1} via ``f.eps.eps`` and so on, outermost direction first.
    """
    return [_seed_one(float(values[i]), i, directions) for i in range(len(values))]


def _seed_one(value: float, index: int, directions: tuple[int, ...]) -> Any:
    if not directions:
        return value
    head, rest = directions[0], directions[1:]
    inner = _seed_one(value, index, rest)
    return Dual(inner, _constant(1.0 if index == head else 0.0, len(rest)))


def _constant(value: float, depth: int) -> Any:
    if depth == 0:
        return value
    return Dual(_constant(value, depth - 1), _constant(0.0, depth - 1))


def perturbation(x: Any, depth: int) -> Any:
    """Coefficient of ε1·…·ε_depth in a nested dual (0 for constants)."""
    for _ in range(depth):
        if not isinstance(x, Dual):
            return 0.0
        x = x.eps
    return primal(x)
