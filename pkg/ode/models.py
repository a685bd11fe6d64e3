"""
Solutions of the leaf equation in profile coordinates (t, sigma) and in
phase coordinates (tau, w, z) with w = sigma(t)/t, z = sigma'(t), t = e^tau.
"""

from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import Any

import numpy as np
from scipy.interpolate import BPoly, CubicHermiteSpline

from config import settings
from integrand.models import (
    ConeParams,
    EllipticProfile,
    FloatArray,
    InvalidParameterError,
    LabError,
    Profile,
)


class DegenerateConvexityError(LabError):
    """Exception raised when phi'' vanishes where the leaf equation needs it."""

    pass


class PicardDivergenceError(LabError):
    """Exception raised when the short-time fixed-point iteration fails to contract."""

    pass


class RegionExitError(LabError):
    """Exception raised when a phase trajectory leaves the trapping region."""

    def __init__(self, message: str, trajectory: "PhaseTrajectory | None" = None):
        super().__init__(message)
        self.trajectory = trajectory


class NonConvergenceError(LabError):
    """Exception raised when a trajectory does not reach (1, 1) by tau_max."""

    def __init__(self, message: str, trajectory: "PhaseTrajectory | None" = None):
        super().__init__(message)
        self.trajectory = trajectory


class DiscriminantError(LabError):
    """Exception raised when the linearization at (1, 1) has complex eigenvalues."""

    pass


class TerminationReason(StrEnum):
    CONVERGED = "converged"
    TAU_MAX = "tau_max"
    REGION_EXIT = "region_exit"


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and sampling of the leaf solver."""

    t_switch: float = field(default_factory=lambda: settings.T_SWITCH)
    rk_tol: float = field(default_factory=lambda: settings.RK_TOL)
    converge_tol: float = field(default_factory=lambda: settings.CONVERGE_TOL)
    region_tol: float = field(default_factory=lambda: settings.REGION_TOL)
    tau_max: float = field(default_factory=lambda: settings.TAU_MAX)
    picard_tol: float = 1e-13
    picard_nodes: int = 201
    picard_max_iter: int = 60
    t_samples: int = 20001
    phase_step: float = 1e-3

    def __post_init__(self) -> None:
        if not 0 < self.t_switch <= 1e-2:
            raise InvalidParameterError(
                f"t_switch must lie in (0, 1e-2], got {self.t_switch}"
            )
        for name in ("rk_tol", "converge_tol", "region_tol", "tau_max", "phase_step"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive")

    def as_dict(self) -> dict[str, float]:
        return {
            "t_switch": self.t_switch,
            "rk_tol": self.rk_tol,
            "converge_tol": self.converge_tol,
            "region_tol": self.region_tol,
            "tau_max": self.tau_max,
        }


@dataclass(frozen=True, eq=False)
class ProfileTable:
    """
    Sampled leaf profile (t, sigma, sigma').

    The second derivative column is optional; when present the table is
    interpolated by a quintic Hermite polynomial, otherwise by a cubic one.
    """

    t: FloatArray
    sigma: FloatArray
    dsigma: FloatArray
    d2sigma: FloatArray | None = None
    params: ConeParams | None = None
    profile_id: str = ""
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("t", "sigma", "dsigma"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.d2sigma is not None:
            object.__setattr__(self, "d2sigma", np.asarray(self.d2sigma, dtype=float))
        lengths = {len(self.t), len(self.sigma), len(self.dsigma)}
        if self.d2sigma is not None:
            lengths.add(len(self.d2sigma))
        if len(lengths) != 1:
            raise InvalidParameterError("table columns must have equal length")
        if len(self.t) < 2:
            raise InvalidParameterError("table needs at least two samples")
        if np.any(np.diff(self.t) <= 0):
            raise InvalidParameterError("table abscissae must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def covers(self, t_a: float, t_b: float) -> bool:
        return self.t_min <= t_a and t_b <= self.t_max

    @cached_property
    def interpolant(self) -> Any:
        if self.d2sigma is None:
            return CubicHermiteSpline(self.t, self.sigma, self.dsigma)
        derivatives = np.column_stack([self.sigma, self.dsigma, self.d2sigma])
        return BPoly.from_derivatives(self.t, derivatives)

    def evaluate(self, t: Any, order: int = 0) -> Any:
        """sigma or one of its derivatives at t, inside the table range."""
        values = np.asarray(t, dtype=float)
        if np.any(values < self.t_min) or np.any(values > self.t_max):
            raise InvalidParameterError(
                f"t outside table range [{self.t_min}, {self.t_max}]"
            )
        result = self.interpolant(values, order) if order else self.interpolant(values)
        if np.ndim(result) == 0:
            return float(result)
        return result

    def leaf_violations(self, monotone_tol: float = 1e-12) -> list[str]:
        """Messages for each violated leaf invariant; empty when the table is a leaf."""
        problems = []
        if self.t[0] == 0 and (self.sigma[0] != 1.0 or self.dsigma[0] != 0.0):
            problems.append("initial conditions sigma(0)=1, sigma'(0)=0 violated")
        if np.any(self.sigma <= self.t):
            index = int(np.argmax(self.sigma <= self.t))
            problems.append(f"sigma <= t at t={self.t[index]:.6g}")
        if np.any(self.dsigma < 0) or np.any(self.dsigma >= 1):
            problems.append("sigma' outside [0, 1)")
        if np.any(np.diff(self.dsigma) < -monotone_tol):
            index = int(np.argmin(np.diff(self.dsigma)))
            problems.append(f"sigma' decreasing at t={self.t[index]:.6g}")
        return problems


@dataclass(frozen=True)
class PhasePoint:
    tau: float
    w: float
    z: float

    @property
    def t(self) -> float:
        return float(np.exp(self.tau))


@dataclass(frozen=True, eq=False)
class PhaseTrajectory:
    """Phase samples with signed distances to the three boundary curves."""

    tau: FloatArray
    w: FloatArray
    z: FloatArray
    dist_gamma1: FloatArray
    dist_gamma2: FloatArray
    dist_gamma3: FloatArray
    termination: TerminationReason
    final_distance: float

    def __len__(self) -> int:
        return len(self.tau)

    def points(self) -> list[PhasePoint]:
        return [
            PhasePoint(float(tau), float(w), float(z))
            for tau, w, z in zip(self.tau, self.w, self.z, strict=True)
        ]

    @property
    def min_distance(self) -> float:
        return float(
            min(
                np.min(self.dist_gamma1),
                np.min(self.dist_gamma2),
                np.min(self.dist_gamma3),
            )
        )


@dataclass(frozen=True)
class LinearizationData:
    """Linearization of the phase field at the fixed point (1, 1)."""

    M: tuple[tuple[float, float], tuple[float, float]]
    lambda_plus: float
    lambda_minus: float
    mu: float
    slopes: tuple[float, float]
    numeric_eigenvalues: tuple[float, float]
    eigenvalue_error: float
    slope_error: float


@dataclass(frozen=True)
class TrappingRegion:
    """
    Region bounded by Gamma1 = {z = 0}, Gamma2 = {V2 = 0} and a lower barrier.

    The lower barrier is the line Gamma3 through (1, 1) with slope
    -2/(k+l-1), or, for the area integrand with k = l, the phase image
    w = z^(-1/3) of the supersolution (1 + t^4)^(1/4).
    """

    params: ConeParams
    profile: Profile
    barrier: str = "line"

    @staticmethod
    def barrier_for(profile: Profile, params: ConeParams) -> str:
        if (
            isinstance(profile, EllipticProfile)
            and profile.alpha == profile.beta
            and params.k == params.l
        ):
            return "area"
        return "line"

    def gamma2(self, z: Any) -> Any:
        """w on Gamma2: (l/k)(phi(z)/phi'(z) - z)."""
        k, l = self.params.k, self.params.l
        z = np.asarray(z, dtype=float)
        return (l / k) * (self.profile.evaluate(z) / self.profile.evaluate(z, 1) - z)

    def gamma2_slope(self, z: Any) -> Any:
        """dw/dz along Gamma2: -(l/k) phi phi'' / phi'^2."""
        k, l = self.params.k, self.params.l
        z = np.asarray(z, dtype=float)
        phi = self.profile.evaluate(z)
        first = self.profile.evaluate(z, 1)
        return -(l / k) * phi * self.profile.evaluate(z, 2) / first**2

    def gamma3(self, z: Any) -> Any:
        """w on the lower barrier."""
        z = np.asarray(z, dtype=float)
        if self.barrier == "area":
            return z ** (-1.0 / 3.0)
        n = self.params.n
        return (n + 1) / (n - 1) - 2 * z / (n - 1)

    def gamma3_slope(self, z: Any) -> Any:
        """dw/dz along the lower barrier."""
        z = np.asarray(z, dtype=float)
        if self.barrier == "area":
            return -(z ** (-4.0 / 3.0)) / 3
        return np.full_like(z, -2.0 / (self.params.n - 1))

    def area_barrier(self, tau: Any) -> tuple[Any, Any]:
        """(e^-tau sigma0(e^tau), sigma0'(e^tau)) for sigma0 = (1 + t^4)^(1/4)."""
        t = np.exp(np.asarray(tau, dtype=float))
        sigma0 = (1 + t**4) ** 0.25
        return sigma0 / t, t**3 / sigma0**3
