"""
Run configuration assembled from command-line flags, a solver key=value
file and the environment, validated with marshmallow.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from marshmallow import (
    RAISE,
    Schema,
    ValidationError,
    fields,
    post_load,
    pre_load,
    validate,
    validates_schema,
)

from config import settings
from foliation.models import CalibrationGrid
from integrand.models import ConeParams, InvalidParameterError
from ode.models import SolverOptions
from ode.schemas import SolverOptionsSchema

logger = logging.getLogger(__name__)

COMMANDS = ("certify", "solve", "foliate", "calibrate", "asymptote", "sweep")
SOLVER_KEYS = ("t_switch", "rk_tol", "converge_tol", "region_tol", "tau_max")
DEFAULT_GRID = "0.2,0.8,1.2,2.0,1e-3"

# Commands that need a single cone (k, l).
SINGLE_CONE = ("certify", "solve", "foliate", "calibrate", "asymptote")


@dataclass
class RunConfig:
    command: str
    k: int | None = None
    l: int | None = None
    p: float | None = None
    q: float | None = None
    b_phi: float = 0.01
    b_psi: float | None = None
    delta: float | None = None
    fourier_n: int | None = None
    area: bool = False
    both_sides: bool = False
    force: bool = False
    grid: CalibrationGrid | None = None
    window: tuple[float, float] | None = None
    seed: int = field(default_factory=lambda: settings.SEED)
    jobs: int = field(default_factory=lambda: settings.JOBS)
    out: Path = field(default_factory=lambda: Path(settings.OUTPUT_DIR))
    format: str = "json"
    leaf: Path | None = None
    samples: int = 200
    trials: int = 20
    eps: float = 1e-2
    solver: SolverOptions = field(default_factory=SolverOptions)
    k_values: list[int] = field(default_factory=list)
    l_values: list[int] = field(default_factory=list)
    p_values: list[float] = field(default_factory=list)

    @property
    def params(self) -> ConeParams:
        if self.k is None or self.l is None:
            raise InvalidParameterError(f"{self.command} needs --k and --l")
        return ConeParams(self.k, self.l)


class IntegerRange(fields.Field):
    """`1..3`, `1,2,5` or `2` as a list of integers."""

    def _deserialize(self, value: Any, attr: str | None, data: Any, **kwargs: Any) -> list[int]:
        text = str(value).strip()
        try:
            if ".." in text:
                start, end = (int(part) for part in text.split(".."))
                values = list(range(start, end + 1))
            else:
                values = [int(part) for part in text.split(",")]
        except ValueError as e:
            raise ValidationError(f"expected a range like 1..3 or a list like 1,2: {text!r}") from e
        if not values:
            raise ValidationError(f"empty range {text!r}")
        return values


class FloatList(fields.Field):
    """Comma-separated floats."""

    def _deserialize(
        self, value: Any, attr: str | None, data: Any, **kwargs: Any
    ) -> list[float]:
        try:
            return [float(part) for part in str(value).split(",")]
        except ValueError as e:
            raise ValidationError(f"expected comma-separated numbers: {value!r}") from e


class GridField(fields.Field):
    def _deserialize(
        self, value: Any, attr: str | None, data: Any, **kwargs: Any
    ) -> CalibrationGrid:
        try:
            return CalibrationGrid.parse(str(value))
        except InvalidParameterError as e:
            raise ValidationError(str(e)) from e


class WindowField(fields.Field):
    """`t_min,t_max` with 0 <= t_min < t_max."""

    def _deserialize(
        self, value: Any, attr: str | None, data: Any, **kwargs: Any
    ) -> tuple[float, float]:
        try:
            start, end = (float(part) for part in str(value).split(","))
        except ValueError as e:
            raise ValidationError(f"expected t_min,t_max: {value!r}") from e
        if not 0 <= start < end:
            raise ValidationError(f"window must satisfy 0 <= t_min < t_max: {value!r}")
        return start, end


class RunConfigSchema(Schema):
    """Validates a run configuration; unknown keys are rejected."""

    class Meta:
        unknown = RAISE

    command = fields.String(required=True, validate=validate.OneOf(COMMANDS))
    k = fields.Integer(allow_none=True, validate=validate.Range(min=1))
    l = fields.Integer(allow_none=True, validate=validate.Range(min=1))
    p = fields.Float(allow_none=True, validate=validate.Range(min=2, min_inclusive=False))
    q = fields.Float(allow_none=True, validate=validate.Range(min=2, min_inclusive=False))
    b_phi = fields.Float(validate=validate.Range(min=0))
    b_psi = fields.Float(allow_none=True, validate=validate.Range(min=0))
    delta = fields.Float(
        allow_none=True,
        validate=validate.Range(min=0, max=0.25, min_inclusive=False, max_inclusive=False),
    )
    fourier_n = fields.Integer(allow_none=True, validate=validate.Range(min=4))
    area = fields.Boolean()
    both_sides = fields.Boolean()
    force = fields.Boolean()
    grid = GridField(allow_none=True)
    window = WindowField(allow_none=True)
    seed = fields.Integer(validate=validate.Range(min=0))
    jobs = fields.Integer(validate=validate.Range(min=1))
    out = fields.Function(deserialize=Path)
    format = fields.String(validate=validate.OneOf(("json", "csv")))
    leaf = fields.Function(deserialize=Path, allow_none=True)
    samples = fields.Integer(validate=validate.Range(min=2))
    trials = fields.Integer(validate=validate.Range(min=1))
    eps = fields.Float(validate=validate.Range(min=0, max=1e-2, min_inclusive=False))
    solver = fields.Nested(SolverOptionsSchema)
    k_values = IntegerRange()
    l_values = IntegerRange()
    p_values = FloatList()

    @pre_load
    def split_sweep_ranges(self, data: dict[str, Any], **kwargs: Any) -> dict[str, Any]:
        """The sweep reads --k, --l and --p as ranges."""
        if data.get("command") == "sweep":
            data = dict(data)
            for name in ("k", "l", "p"):
                if name in data:
                    data[f"{name}_values"] = data.pop(name)
        return data

    @validates_schema
    def validate_command_fields(self, data: dict[str, Any], **kwargs: Any) -> None:
        command = data.get("command")
        if command in SINGLE_CONE:
            missing = [name for name in ("k", "l") if data.get(name) is None]
            if missing:
                raise ValidationError(f"{command} requires --k and --l", missing[0])
        if command in SINGLE_CONE and not data.get("area"):
            if data.get("p") is None:
                raise ValidationError(f"{command} requires --p unless --area is given", "p")
        if command == "sweep":
            for name in ("k_values", "l_values", "p_values"):
                if not data.get(name):
                    raise ValidationError("sweep requires --k, --l and --p ranges", name)
            if any(value < 1 for value in data["k_values"] + data["l_values"]):
                raise ValidationError("k and l must be at least 1", "k_values")
            if any(value <= 2 for value in data["p_values"]):
                raise ValidationError("exponents must exceed 2", "p_values")
        fourier_n = data.get("fourier_n")
        if fourier_n is not None and fourier_n % 2:
            raise ValidationError("the Fourier order N must be even", "fourier_n")

    @post_load
    def make_config(self, data: dict[str, Any], **kwargs: Any) -> RunConfig:
        return RunConfig(**data)


def solver_settings(
    path: str | os.PathLike[str] | None, overrides: dict[str, Any]
) -> dict[str, Any]:
    """
    Solver options from a key=value file, with flag values taking precedence.

    Keys absent from both fall back to the environment defaults of SolverOptions.
    """
    values: dict[str, Any] = {}
    if path is not None:
        if not Path(path).exists():
            raise ValidationError(f"solver config {path} not found", "solver")
        values.update(
            {key.lower(): value for key, value in dotenv_values(path).items()}
        )
        logger.debug(f"Solver options from {path}: {values}")
    values.update({key: value for key, value in overrides.items() if value is not None})
    return values


def load_run_config(data: dict[str, Any]) -> RunConfig:
    """
    Raises:
        ValidationError: If a value is missing, out of range or unknown
    """
    return RunConfigSchema().load(data)
