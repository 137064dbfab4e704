"""Domain models for subgroup-separable chained Hamiltonians."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_EPS_DOM = 1e-6
DEFAULT_MAX_DIMENSION = 8


class FamilyTag(str, Enum):
    """Built-in chain families."""

    OSCILLATOR_3D = "oscillator3d"
    KEPLER_COULOMB_3D = "kepler_coulomb3d"
    FOUR_D_EXAMPLE = "four_d_example"
    OSCILLATOR_ND = "oscillator_nd"
    KEPLER_COULOMB_ND = "kepler_coulomb_nd"
    CUSTOM = "custom"


class PotentialKind(str, Enum):
    HARMONIC_RADIAL = "harmonic_radial"
    KEPLER_RADIAL = "kepler_radial"
    INV_COS_SQ = "inv_cos_sq"
    INV_SIN_SQ = "inv_sin_sq"
    ZERO = "zero"


class CouplingKind(str, Enum):
    INV_RADIAL_SQ = "inv_radial_sq"
    INV_SIN_SQ = "inv_sin_sq"


RADIAL_KINDS = {PotentialKind.HARMONIC_RADIAL, PotentialKind.KEPLER_RADIAL}
ANGULAR_KINDS = {PotentialKind.INV_COS_SQ, PotentialKind.INV_SIN_SQ}


class RationalParam(BaseModel):
    """Positive rational angular parameter k = num/den in lowest terms."""

    model_config = ConfigDict(frozen=True)

    num: int = Field(ge=1)
    den: int = Field(default=1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def from_text(cls, data: object) -> object:
        """Accept ``"p/q"`` strings and bare integers without going through floats."""
        if isinstance(data, bool) or not isinstance(data, (str, int)):
            return data
        if isinstance(data, int):
            return {"num": data, "den": 1}
        raw = data.strip()
        num_text, slash, den_text = raw.partition("/")
        if slash and not den_text.strip():
            raise ValueError(f"cannot parse rational {raw!r}: missing denominator")
        try:
            return {"num": int(num_text), "den": int(den_text) if slash else 1}
        except ValueError as e:
            raise ValueError(f"cannot parse rational {raw!r}") from e

    @model_validator(mode="after")
    def check_coprime(self) -> "RationalParam":
        if gcd(self.num, self.den) != 1:
            raise ValueError(f"{self.num}/{self.den} is not in lowest terms")
        return self

    @classmethod
    def parse(cls, text: str | int) -> "RationalParam":
        return cls.model_validate(text)

    @property
    def value(self) -> float:
        return self.num / self.den

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}" if self.den != 1 else str(self.num)


class PotentialTerm(BaseModel):
    """One additive potential term of a chain level."""

    model_config = ConfigDict(frozen=True)

    kind: PotentialKind
    coefficient: float = 0.0
    k: RationalParam | None = None

    @model_validator(mode="after")
    def check_k(self) -> "PotentialTerm":
        if self.kind in ANGULAR_KINDS and self.k is None:
            raise ValueError(f"{self.kind.value} term needs an angular parameter k")
        if self.kind not in ANGULAR_KINDS and self.k is not None:
            raise ValueError(f"{self.kind.value} term takes no angular parameter")
        return self

    @property
    def is_absent(self) -> bool:
        return self.kind == PotentialKind.ZERO or self.coefficient == 0.0


class CouplingTerm(BaseModel):
    """Factor f_i(q_i) multiplying L_{i+1} inside L_i."""

    model_config = ConfigDict(frozen=True)

    kind: CouplingKind
    k: RationalParam | None = None

    @model_validator(mode="after")
    def check_k(self) -> "CouplingTerm":
        if self.kind == CouplingKind.INV_SIN_SQ and self.k is None:
            raise ValueError("inv_sin_sq coupling needs an angular parameter k")
        if self.kind == CouplingKind.INV_RADIAL_SQ and self.k is not None:
            raise ValueError("inv_radial_sq coupling takes no angular parameter")
        return self


class ChainLevel(BaseModel):
    """Potential terms and coupling of one level of the chain."""

    model_config = ConfigDict(frozen=True)

    potential: tuple[PotentialTerm, ...] = ()
    coupling: CouplingTerm | None = None


class ChainSystem(BaseModel):
    """Declarative chained Hamiltonian on the chart (r, θ1, …, θ_{n-1})."""

    model_config = ConfigDict(frozen=True)

    levels: tuple[ChainLevel, ...]
    family: FamilyTag = FamilyTag.CUSTOM
    eps_dom: float = Field(default=DEFAULT_EPS_DOM, gt=0)
    max_dimension: int = Field(default=DEFAULT_MAX_DIMENSION, ge=1)

    @field_validator("levels")
    @classmethod
    def check_not_empty(cls, v: tuple[ChainLevel, ...]) -> tuple[ChainLevel, ...]:
        if not v:
            raise ValueError("a chain needs at least one level")
        return v

    @model_validator(mode="after")
    def check_levels(self) -> "ChainSystem":
        n = len(self.levels)
        if n > self.max_dimension:
            raise ValueError(f"dimension {n} exceeds the cap of {self.max_dimension}")
        for index, level in enumerate(self.levels, start=1):
            for term in level.potential:
                if term.kind in RADIAL_KINDS and index != 1:
                    raise ValueError(f"level {index}: radial term {term.kind.value} only allowed at level 1")
                if term.kind in ANGULAR_KINDS and index == 1:
                    raise ValueError(f"level 1: angular term {term.kind.value} not allowed on r")
            if index == n:
                if level.coupling is not None:
                    raise ValueError(f"level {n}: the last level takes no coupling")
            elif level.coupling is None:
                raise ValueError(f"level {index}: missing coupling to level {index + 1}")
            elif index == 1 and level.coupling.kind != CouplingKind.INV_RADIAL_SQ:
                raise ValueError("level 1: coupling must be inv_radial_sq")
            elif index > 1 and level.coupling.kind != CouplingKind.INV_SIN_SQ:
                raise ValueError(f"level {index}: coupling must be inv_sin_sq")
        return self

    @property
    def n(self) -> int:
        return len(self.levels)

    def level(self, index: int) -> ChainLevel:
        """1-based level access."""
        return self.levels[index - 1]


def _readonly(values: object) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PhasePoint:
    """Real coordinates q = (r, θ1, …) and conjugate momenta p."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        q = _readonly(self.q)
        p = _readonly(self.p)
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError("q and p must be 1-d arrays of equal length")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "PhasePoint":
        half = len(x) // 2
        return cls(q=x[:half], p=x[half:])

    @property
    def n(self) -> int:
        return len(self.q)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


@dataclass(frozen=True)
class ChainValues:
    """Evaluated nested constants L1 … Ln (H = L1)."""

    L: tuple[float, ...] = field(default_factory=tuple)

    @property
    def H(self) -> float:
        return self.L[0]

    def __getitem__(self, index: int) -> float:
        """1-based access, matching the L_i labels."""
        return self.L[index - 1]
