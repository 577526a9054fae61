"""Experiment configuration files.

A config is plain ``key = value`` text. Keys are dotted paths into nested
sections, ``#`` starts a comment and comma-separated values are lists::

    task = minimize
    problem.L = 1.0
    problem.a.family = exp_quadratic
    problem.a.alpha = 1.0
    minimize.presets = plus_one, minus_one, odd_tanh, random

The parsed tree is validated by the pydantic models below; every field has
a default and unknown keys are rejected.
"""

from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError

from .exceptions import ConfigError
from .solve1d import DEFAULT_PRESETS
from .weights import (
    Constant,
    EvenPolynomial,
    ExpQuadratic,
    Polynomial,
    Potential,
    PowerAbs,
    Problem,
    Quartic,
    Tabulated,
    TabulatedEven,
    WeightFn,
)


def _listify(value: Any) -> Any:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


FloatList = Annotated[list[float], BeforeValidator(_listify)]
StrList = Annotated[list[str], BeforeValidator(_listify)]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ConstantWeight(_Block):
    family: Literal["constant"] = "constant"
    value: float = 1.0

    def build(self) -> WeightFn:
        return Constant(self.value)


class ExpQuadraticWeight(_Block):
    family: Literal["exp_quadratic"] = "exp_quadratic"
    alpha: float = 1.0

    def build(self) -> WeightFn:
        return ExpQuadratic(self.alpha)


class PowerAbsWeight(_Block):
    family: Literal["power_abs"] = "power_abs"
    beta: float = -2.0
    delta: float = 1.0

    def build(self) -> WeightFn:
        return PowerAbs(self.beta, self.delta)


class PolynomialWeight(_Block):
    family: Literal["polynomial"] = "polynomial"
    coeffs: FloatList = Field(default_factory=lambda: [1.0])

    def build(self) -> WeightFn:
        return Polynomial(self.coeffs)


class TabulatedWeight(_Block):
    family: Literal["tabulated"] = "tabulated"
    nodes: FloatList = Field(default_factory=lambda: [-1.0, 1.0])
    values: FloatList = Field(default_factory=lambda: [1.0, 1.0])

    def build(self) -> WeightFn:
        return Tabulated(self.nodes, self.values)


WeightConfig = Annotated[
    Union[ConstantWeight, ExpQuadraticWeight, PowerAbsWeight, PolynomialWeight, TabulatedWeight],
    Field(discriminator="family"),
]


class QuarticPotential(_Block):
    family: Literal["quartic"] = "quartic"
    M: float = 1.0

    def build(self) -> Potential:
        return Quartic(self.M)


class EvenPolynomialPotential(_Block):
    family: Literal["even_polynomial"] = "even_polynomial"
    coeffs: FloatList = Field(default_factory=lambda: [0.0, 1.0])
    well_location: float = 1.0
    double_well: bool = False

    def build(self) -> Potential:
        return EvenPolynomial(self.coeffs, self.well_location, self.double_well)


class TabulatedEvenPotential(_Block):
    family: Literal["tabulated_even"] = "tabulated_even"
    nodes: FloatList = Field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5])
    values: FloatList = Field(default_factory=lambda: [0.25, 0.140625, 0.0, 0.390625])
    well_location: float = 1.0
    double_well: bool = True

    def build(self) -> Potential:
        return TabulatedEven(self.nodes, self.values, self.well_location, self.double_well)


PotentialConfig = Annotated[
    Union[QuarticPotential, EvenPolynomialPotential, TabulatedEvenPotential],
    Field(discriminator="family"),
]


class ProblemConfig(_Block):
    L: float = 1.0
    m: float = 1.0
    a: WeightConfig = Field(default_factory=ConstantWeight)
    b: WeightConfig = Field(default_factory=ConstantWeight)
    G: PotentialConfig = Field(default_factory=QuarticPotential)

    def build(self, **changes) -> Problem:
        values = {"L": self.L, "m": self.m, **changes}
        return Problem(values["L"], values["m"], self.a.build(), self.b.build(), self.G.build())


class MinimizeOptions(_Block):
    presets: StrList = Field(default_factory=lambda: list(DEFAULT_PRESETS))
    second_order: bool = False
    antisymmetric: bool = True
    shoot: bool = False
    shoot_steps: int = 100_000


class RearrangeOptions(_Block):
    init: str = "plus_one"
    solution: str | None = None
    K: int = 2049
    t_points: int = 101


class BoundsOptions(_Block):
    scan: bool = True
    horizon: float = 400.0
    phi_L: FloatList = Field(default_factory=list)


class EigenOptions(_Block):
    mesh: int = 1024


class SweepOptions(_Block):
    variable: Literal["L", "m"] = "L"
    values: FloatList = Field(default_factory=lambda: [2.0, 2.5, 2.8284271247461903, 3.0, 5.0, 10.0])
    presets: StrList = Field(default_factory=lambda: ["plus_one", "minus_one", "odd_tanh", "random"])
    points_per_unit: int = 64


class ExperimentConfig(_Block):
    """A full experiment: the problem, the task and its options."""

    task: Literal["audit", "minimize", "rearrange", "bounds", "eigen", "sweep"] = "audit"
    seed: int = 0
    mesh: int = 1024
    grid_points: int = 2049
    out: str | None = None
    jobs: int | None = None
    problem: ProblemConfig = Field(default_factory=ProblemConfig)
    minimize: MinimizeOptions = Field(default_factory=MinimizeOptions)
    rearrange: RearrangeOptions = Field(default_factory=RearrangeOptions)
    bounds: BoundsOptions = Field(default_factory=BoundsOptions)
    eigen: EigenOptions = Field(default_factory=EigenOptions)
    sweep: SweepOptions = Field(default_factory=SweepOptions)


def _scalar(text: str) -> Any:
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("none", "null"):
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _value(text: str) -> Any:
    if "," in text:
        return [_scalar(part.strip()) for part in text.split(",") if part.strip()]
    return _scalar(text)


def parse_config_text(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    """Parse config text into a nested mapping and the line number of every key.

    Raises:
        ConfigError: On malformed lines, duplicate keys or a key used both as
            a value and as a section.
    """
    tree: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or any(not part for part in key.split(".")):
            raise ConfigError("empty key", key=key, line=number)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=number)
        node = tree
        parts = key.split(".")
        for depth, part in enumerate(parts[:-1]):
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"'{'.'.join(parts[: depth + 1])}' is a value, not a section", key=key, line=number)
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError("key is a section, not a value", key=key, line=number)
        node[parts[-1]] = _value(value)
        lines[key] = number
    return tree, lines


def _locate(loc: tuple, lines: dict[str, int]) -> tuple[str, int | None]:
    """Map a pydantic error location to the dotted key written in the file."""
    kept: list[str] = []
    for part in loc:
        candidate = ".".join(kept + [str(part)])
        if any(key == candidate or key.startswith(candidate + ".") for key in lines):
            kept.append(str(part))
    key = ".".join(kept) if kept else ".".join(str(part) for part in loc)
    if key in lines:
        return key, lines[key]
    below = sorted(number for name, number in lines.items() if name.startswith(key + "."))
    return key, below[0] if below else None


def config_from_text(text: str) -> ExperimentConfig:
    """Parse and validate config text.

    Raises:
        ConfigError: With the offending key and line.
    """
    tree, lines = parse_config_text(text)
    try:
        return ExperimentConfig.model_validate(tree)
    except ValidationError as error:
        first = error.errors()[0]
        key, line = _locate(tuple(first["loc"]), lines)
        raise ConfigError(first["msg"], key=key, line=line) from error


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a config file (UTF-8).

    Raises:
        ConfigError: If the file cannot be parsed or validated.
        FileNotFoundError: If the file does not exist.
    """
    return config_from_text(Path(path).read_text(encoding="utf-8"))
