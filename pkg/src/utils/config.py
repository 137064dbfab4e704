"""Run configuration using Pydantic Settings with YAML support."""

from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.chain.models import ChainLevel, FamilyTag, RationalParam

if TYPE_CHECKING:
    from src.chain.models import ChainSystem

MIN_TOL = 1e-14
MAX_TOL = 1e-3

# keys accepted at the top level of a config and moved into the system block
_SYSTEM_KEYS = ("family", "alpha", "beta", "k", "levels", "eps_dom", "control_perturbation")
_FOUR_D_K = ("2", "1", "1")


class ConfigError(Exception):
    """Config text could not be parsed or validated."""

    def __init__(self, issues: list[str]):
        self.issues = issues
        super().__init__("\n".join(issues))


class SuiteName(str, Enum):
    INVOLUTION = "involution"
    SUPERINTEGRABILITY = "superintegrability"
    CONSERVATION = "conservation"
    POLYNOMIALITY = "polynomiality"
    GEOMETRY = "geometry"
    CLOSED_FORMS = "closed-forms"


class SystemConfig(BaseModel):
    """Which chain to verify."""

    family: FamilyTag = FamilyTag.OSCILLATOR_3D
    alpha: float = 1.0
    beta: list[float] = Field(default_factory=lambda: [1.0, 2.0, 3.0])
    k: list[str] = Field(default_factory=lambda: ["1", "1"])
    levels: list[ChainLevel] | None = None
    eps_dom: float | None = Field(default=None, gt=0)
    control_perturbation: float | None = None

    @field_validator("k", mode="before")
    @classmethod
    def validate_k(cls, v: Any) -> list[str]:
        if not isinstance(v, list):
            raise ValueError("k must be a list of \"p/q\" strings")
        out = []
        for item in v:
            try:
                out.append(str(RationalParam.parse(item)))
            except ValueError as e:
                raise ValueError(f"k entry {item!r}: {_first_message(e)}") from None
        return out

    @model_validator(mode="after")
    def check_family(self) -> "SystemConfig":
        if "k" not in self.model_fields_set and self.family == FamilyTag.FOUR_D_EXAMPLE:
            self.k = list(_FOUR_D_K)
        if "beta" not in self.model_fields_set and self.family != FamilyTag.CUSTOM:
            self.beta = [float(j) for j in range(1, len(self.k) + 2)] if self.k else []
        if self.family == FamilyTag.CUSTOM and not self.levels:
            raise ValueError("family custom needs a levels list")
        if self.family != FamilyTag.CUSTOM and self.levels:
            raise ValueError(f"levels are only read for family custom, not {self.family.value}")
        if self.control_perturbation is not None and len(self.beta) < 1:
            raise ValueError("control_perturbation needs at least one beta")
        return self

    def build(self, control: bool = False) -> "ChainSystem":
        """Chain system of this block; ``control`` shifts β1 by the control perturbation."""
        from src.chain.hamiltonian import build_custom, build_system

        if self.family == FamilyTag.CUSTOM:
            assert self.levels is not None
            return build_custom(self.levels, eps_dom=self.eps_dom)
        beta = list(self.beta)
        if control:
            beta[0] += self.control_perturbation or 0.0
        return build_system(self.family, self.alpha, beta, self.k, eps_dom=self.eps_dom)


class ToleranceConfig(BaseModel):
    """Pass thresholds of the suites."""

    bracket: float = Field(default=1e-9, gt=0)
    commute: float = Field(default=1e-8, gt=0)
    rank: float = Field(default=1e-8, gt=0)
    drift: float = Field(default=1e-6, gt=0)
    geom: float = Field(default=1e-7, gt=0)
    formula: float = Field(default=1e-9, gt=0)

    def scaled(self, factor: float) -> "ToleranceConfig":
        if factor <= 0:
            raise ValueError("tolerance scale must be positive")
        return ToleranceConfig(**{name: value * factor for name, value in self.model_dump().items()})


class TrajectoryConfig(BaseModel):
    """Integration parameters of the conservation suite."""

    t_max: float = Field(default=100.0, ge=0)
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    n_trajectories: int = Field(default=5, ge=0)
    control_drift: float = Field(default=1e-2, gt=0)  # p_r must drift at least this much

    @field_validator("rel_tol", "abs_tol")
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        if not MIN_TOL <= v <= MAX_TOL:
            raise ValueError(f"integrator tolerance must lie in [{MIN_TOL}, {MAX_TOL}]")
        return v


class SamplingConfig(BaseModel):
    """Seeded phase-point counts."""

    n_points: int = Field(default=100, ge=1)
    geometry_points: int = Field(default=20, ge=1)
    formula_points: int = Field(default=20, ge=1)
    degree_points: int = Field(default=2, ge=1)
    dmax: int = Field(default=12, ge=0, le=16)


class ExpectationsConfig(BaseModel):
    """Optional expected outcomes the suites compare against."""

    rank: int | None = None
    degrees: list[int | None] | None = None
    conformally_flat: bool | None = None
    flat: bool | None = None


class OutputConfig(BaseModel):
    report: Path | None = None
    traj_dir: Path | None = None


class RunConfig(BaseSettings):
    """Root configuration of one verification run."""

    model_config = SettingsConfigDict(
        env_prefix="WORKBENCH_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    system: SystemConfig = Field(default_factory=SystemConfig)
    suites: list[SuiteName] = Field(default_factory=lambda: list(SuiteName))
    seed: int = Field(default=0, ge=0)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    trajectory: TrajectoryConfig = Field(default_factory=TrajectoryConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    expectations: ExpectationsConfig = Field(default_factory=ExpectationsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def hoist_system_keys(cls, data: Any) -> Any:
        """Allow the system block's keys at the top level."""
        if not isinstance(data, dict):
            return data
        loose = {key: data[key] for key in _SYSTEM_KEYS if key in data}
        if not loose:
            return data
        data = {key: value for key, value in data.items() if key not in loose}
        system = dict(data.get("system") or {})
        for key, value in loose.items():
            if key in system:
                raise ValueError(f"{key} given both at top level and in system")
            system[key] = value
        data["system"] = system
        return data

    @field_validator("suites")
    @classmethod
    def validate_suites(cls, v: list[SuiteName]) -> list[SuiteName]:
        if len(set(v)) != len(v):
            raise ValueError("suites must not repeat")
        return v


def _first_message(error: ValueError) -> str:
    if isinstance(error, ValidationError):
        return error.errors()[0]["msg"].removeprefix("Value error, ")
    return str(error)


def _node_line(root: yaml.Node | None, loc: tuple[Any, ...]) -> int | None:
    """1-based line of the deepest YAML node reached along a pydantic error location."""
    if root is None:
        return None
    node = root
    path = list(loc)
    if path and path[0] == "system" and _child(root, "system") is None:
        path = path[1:]
    for part in path:
        child = _child(node, part)
        if child is None:
            break
        node = child
    return node.start_mark.line + 1


def _child(node: yaml.Node, key: Any) -> yaml.Node | None:
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            if key_node.value == str(key):
                return value_node
    elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and 0 <= key < len(node.value):
        return node.value[key]
    return None


def _format_errors(error: ValidationError, root: yaml.Node | None) -> list[str]:
    issues = []
    for item in error.errors():
        loc = tuple(item["loc"])
        field = ".".join(str(part) for part in loc) or "<root>"
        line = _node_line(root, loc)
        prefix = f"line {line}: " if line is not None else ""
        issues.append(f"{prefix}{field}: {item['msg'].removeprefix('Value error, ')}")
    return issues


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; errors carry line and field diagnostics."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError([f"{where}{getattr(e, 'problem', None) or e}"]) from e

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(["line 1: <root>: config must be a mapping"])

    data = _expand_env_vars(data)
    try:
        config = RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(_format_errors(e, root)) from e

    from src.chain.hamiltonian import ChainError

    try:
        config.system.build()
    except (ChainError, ValueError) as e:
        line = _node_line(root, ("system",))
        raise ConfigError([f"line {line}: system: {_first_message(e)}"]) from e
    return config


def load_config(config_path: Path | str) -> RunConfig:
    """Load configuration from a YAML file with environment variable overrides."""
    path = Path(config_path)
    if not path.exists():
        raise ConfigError([f"{path}: no such config file"])
    return parse_config(path.read_text())


def _expand_env_vars(obj: Any) -> Any:
    """Recursively expand ${VAR} patterns in config values."""
    import os
    import re

    if isinstance(obj, str):
        pattern = re.compile(r"\$\{([^}]+)\}")
        for var in pattern.findall(obj):
            obj = obj.replace(f"${{{var}}}", os.environ.get(var, ""))
        return obj
    elif isinstance(obj, dict):
        return {k: _expand_env_vars(v) for k, v in obj.items()}
    elif isinstance(obj, list):
        return [_expand_env_vars(item) for item in obj]
    return obj


def save_config(config: RunConfig, config_path: Path | str) -> None:
    """Write the fully defaulted configuration back to YAML."""
    path = Path(config_path)
    with open(path, "w") as f:
        yaml.dump(config.model_dump(mode="json"), f, default_flow_style=False, sort_keys=False)
