"""
Leaves of the foliation and the reports produced when checking it.

A point of R^{k+l+2} is represented by its reduced coordinates (u, v) =
(|x|, |y|). The y side of the cone is {v > u}, the x side {u > v}.
"""

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np

from integrand.models import InvalidParameterError, LabError
from ode.models import ProfileTable


class LeafDomainError(LabError):
    """Exception raised when a point or grid is not strictly inside a leaf's side."""

    pass


class LeafSide(StrEnum):
    Y_SIDE = "y_side"
    X_SIDE = "x_side"


@dataclass(frozen=True, eq=False)
class Leaf:
    """
    The dilation by `scale` of a unit leaf.

    On the y side the leaf is {v = scale * sigma(u / scale)}; on the x side
    the roles of u and v are exchanged.
    """

    side: LeafSide
    table: ProfileTable
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise InvalidParameterError(f"leaf scale must be positive, got {self.scale}")
        object.__setattr__(self, "side", LeafSide(self.side))

    def to_leaf_coordinates(self, u: Any, v: Any) -> tuple[Any, Any]:
        """(argument, height) of a reduced point: (u, v) on the y side, (v, u) otherwise."""
        if self.side == LeafSide.Y_SIDE:
            return u, v
        return v, u

    def from_leaf_coordinates(self, argument: Any, height: Any) -> tuple[Any, Any]:
        return self.to_leaf_coordinates(argument, height)

    def height(self, argument: Any) -> Any:
        """scale * sigma(argument / scale)."""
        t = np.asarray(argument, dtype=float) / self.scale
        if np.any(t > self.table.t_max):
            raise LeafDomainError(
                f"argument beyond the computed leaf (t_max = {self.table.t_max:.4g})"
            )
        return self.scale * self.table.evaluate(t)

    def points(self, samples: int = 200) -> tuple[np.ndarray, np.ndarray]:
        """Reduced (u, v) samples of the leaf, log-spaced in the argument after 0."""
        if samples < 2:
            raise InvalidParameterError("at least two samples are needed")
        positive = self.table.t[self.table.t > 0]
        t = np.concatenate(
            [[0.0], np.geomspace(positive[0], self.table.t_max, samples - 1)]
        )
        argument = self.scale * t
        height = self.scale * self.table.evaluate(t)
        return self.from_leaf_coordinates(argument, height)


@dataclass(frozen=True)
class CalibrationGrid:
    """Rectangle [u_min, u_max] x [v_min, v_max] of the reduced plane and spacing h."""

    u_min: float
    u_max: float
    v_min: float
    v_max: float
    h: float
    points: int = 41

    def __post_init__(self) -> None:
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise InvalidParameterError("grid bounds must satisfy min < max")
        if self.h <= 0 or self.points < 2:
            raise InvalidParameterError("grid spacing must be positive and points >= 2")

    @classmethod
    def parse(cls, text: str) -> "CalibrationGrid":
        """Read `u_min,u_max,v_min,v_max,h`."""
        try:
            values = [float(part) for part in text.split(",")]
        except ValueError as e:
            raise InvalidParameterError(f"invalid grid {text!r}: {e}") from e
        if len(values) != 5:
            raise InvalidParameterError(
                f"grid needs u_min,u_max,v_min,v_max,h, got {text!r}"
            )
        return cls(*values)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        u = np.linspace(self.u_min, self.u_max, self.points)
        v = np.linspace(self.v_min, self.v_max, self.points)
        return np.meshgrid(u, v, indexing="ij")

    def as_dict(self) -> dict[str, float]:
        return {
            "u_min": self.u_min,
            "u_max": self.u_max,
            "v_min": self.v_min,
            "v_max": self.v_max,
            "h": self.h,
            "points": self.points,
        }


@dataclass
class CalibrationReport:
    grid: CalibrationGrid
    side: str
    spacings: list[float]
    max_abs_divergence: list[float]
    refinement_ratios: list[float]
    convergence_order: float
    euler_identity_max_error: float
    support_inequality_violations: int
    support_samples: int = 0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def extrapolated_limit(self) -> float:
        """Richardson limit of the maxima at h/2 and h/4 for a second-order error."""
        _, coarse, fine = self.max_abs_divergence
        return (4 * fine - coarse) / 3

    @property
    def passed(self) -> bool:
        # Below 1e-9 the maxima are at the rounding floor and carry no order.
        converging = self.convergence_order >= 1.8 or self.max_abs_divergence[2] <= 1e-9
        return (
            converging
            and abs(self.extrapolated_limit) <= 1e-6
            and self.euler_identity_max_error <= 1e-10
            and self.support_inequality_violations == 0
        )


@dataclass
class FoliationReport:
    """Uniqueness, monotonicity and disjointness of the leaves through sampled points."""

    side: str
    samples: int
    max_relative_residual: float
    monotonicity_violations: int
    disjointness_violations: int
    max_derivative_mismatch: float
    min_excess: float
    excess_decreasing: bool
    first_variation_residual: float

    @property
    def passed(self) -> bool:
        return (
            self.max_relative_residual <= 1e-12
            and self.monotonicity_violations == 0
            and self.disjointness_violations == 0
            and self.max_derivative_mismatch <= 1e-3
            and self.min_excess > 0
            and self.excess_decreasing
            and self.first_variation_residual <= 1e-6
        )


@dataclass
class PerturbationTrial:
    center: float
    width: float
    sign: int
    epsilons: list[float]
    delta_energy: list[float]
    fitted_c: float
    fit_residual: float

    @property
    def min_delta_energy(self) -> float:
        return min(self.delta_energy)


@dataclass
class PerturbationReport:
    interval: tuple[float, float]
    eps: float
    q_tol: float
    trials: list[PerturbationTrial]
    redrawn: int = 0

    @property
    def min_delta_energy(self) -> float:
        return min(trial.min_delta_energy for trial in self.trials)

    @property
    def min_fitted_c(self) -> float:
        return min(trial.fitted_c for trial in self.trials)

    @property
    def passed(self) -> bool:
        return self.min_delta_energy >= -self.q_tol and self.min_fitted_c > 0
