"""
Domain types for one-variable profiles and two-sided integrands.

A profile is an even convex function of one variable. Two profiles and a pair
of sphere dimensions (k, l) describe a one-homogeneous integrand on
R^{k+l+2} through its reduction to (|x|, |y|).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import Any, ClassVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]


class LabError(Exception):
    """Base exception for every lawsonlab failure."""

    pass


class InvalidParameterError(LabError):
    """Exception raised when construction parameters are out of range."""

    pass


class ProfileDomainError(LabError):
    """Exception raised when a profile is evaluated outside its domain."""

    pass


class IncompatibleIntegrandError(LabError):
    """Exception raised when the two profiles do not match across the diagonal."""

    pass


class OutOfRangeError(LabError):
    """Exception raised when a slope lies outside the range of the derivative."""

    pass


class NonConvexApproximationError(LabError):
    """Exception raised when a Fourier approximation loses convexity."""

    pass


class ProfileSide(StrEnum):
    PHI = "phi"
    PSI = "psi"


@dataclass(frozen=True)
class ConeParams:
    """Sphere dimensions of the Lawson cone C_kl in R^{k+l+2}."""

    k: int
    l: int

    def __post_init__(self) -> None:
        for name, value in (("k", self.k), ("l", self.l)):
            if isinstance(value, bool) or not isinstance(value, int | np.integer):
                raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise InvalidParameterError(f"{name} must be >= 1, got {value}")

    @property
    def n(self) -> int:
        return self.k + self.l

    @property
    def dimension(self) -> int:
        return self.k + self.l + 2

    def swapped(self) -> "ConeParams":
        """Exchange the roles of the x-block and the y-block."""
        return ConeParams(k=self.l, l=self.k)

    def slope(self, side: ProfileSide = ProfileSide.PHI) -> float:
        """
        Required first derivative at s = 1 for the given side.

        Args:
            side: phi uses l/(k+l); psi uses k/(k+l)

        Returns:
            The one-jet slope r
        """
        if side == ProfileSide.PHI:
            return self.l / self.n
        return self.k / self.n


def _parity(s: FloatArray, order: int) -> FloatArray:
    if order % 2 == 0:
        return np.ones_like(s)
    return np.sign(s)


class Profile(ABC):
    """
    Abstract even profile with derivatives up to order 3.

    Subclasses implement `_derivative` for s >= 0; evenness is applied here.
    """

    variant: ClassVar[str]

    def evaluate(self, s: ArrayLike, order: int = 0) -> Any:
        """
        Evaluate the order-th derivative at s.

        Args:
            s: Scalar or array of abscissae
            order: Derivative order in {0, 1, 2, 3}

        Returns:
            A float for scalar input, otherwise an array of the same shape

        Raises:
            InvalidParameterError: If order is not in {0, 1, 2, 3}
            ProfileDomainError: If s lies outside the evaluation domain
        """
        if order not in (0, 1, 2, 3):
            raise InvalidParameterError(f"order must be in 0..3, got {order}")
        values = np.asarray(s, dtype=float)
        magnitude = np.abs(values)
        result = self._derivative(magnitude, order) * _parity(values, order)
        if np.ndim(result) == 0:
            return float(result)
        return result

    def __call__(self, s: ArrayLike, order: int = 0) -> Any:
        return self.evaluate(s, order)

    @abstractmethod
    def _derivative(self, s: FloatArray, order: int) -> FloatArray:
        """Order-th derivative for s >= 0."""
        pass

    @abstractmethod
    def parameters(self) -> dict[str, Any]:
        """Variant parameters for serialization."""
        pass


@dataclass(frozen=True)
class PowerProfile(Profile):
    """phi(s) = a + b s^2 + c |s|^p."""

    variant: ClassVar[str] = "power"

    a: float
    b: float
    c: float
    p: float
    side: ProfileSide = ProfileSide.PHI

    @property
    def is_raw(self) -> bool:
        return self.b == 0

    def _derivative(self, s: FloatArray, order: int) -> FloatArray:
        a, b, c, p = self.a, self.b, self.c, self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            if order == 0:
                return a + b * s**2 + c * s**p
            if order == 1:
                return 2 * b * s + c * p * s ** (p - 1)
            if order == 2:
                return 2 * b + c * p * (p - 1) * s ** (p - 2)
            return c * p * (p - 1) * (p - 2) * s ** (p - 3)

    def parameters(self) -> dict[str, Any]:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "p": self.p,
            "side": str(self.side),
        }


@dataclass(frozen=True)
class EllipticProfile(Profile):
    """phi(s) = sqrt(alpha s^2 + beta), analytic and uniformly convex."""

    variant: ClassVar[str] = "elliptic"

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise InvalidParameterError(
                f"alpha and beta must be positive, got {self.alpha}, {self.beta}"
            )

    def _derivative(self, s: FloatArray, order: int) -> FloatArray:
        alpha, beta = self.alpha, self.beta
        root = np.sqrt(alpha * s**2 + beta)
        if order == 0:
            return root
        if order == 1:
            return alpha * s / root
        if order == 2:
            return alpha * beta / root**3
        return -3 * alpha**2 * beta * s / root**5

    def parameters(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class AreaProfile(EllipticProfile):
    """The area profile sqrt(1 + s^2)."""

    variant: ClassVar[str] = "area"

    alpha: float = 1.0
    beta: float = 1.0

    def parameters(self) -> dict[str, Any]:
        return {}


@dataclass(frozen=True)
class ReflectedProfile(Profile):
    """s -> s * base(1/s), defined for |s| > eps."""

    variant: ClassVar[str] = "reflected"

    base: Profile
    eps: float = 1e-3

    def _derivative(self, s: FloatArray, order: int) -> FloatArray:
        if np.any(s <= self.eps):
            raise ProfileDomainError(
                f"reflected profile is singular at 0; evaluation requires |s| > {self.eps}"
            )
        u = 1.0 / s
        if order == 0:
            return s * self.base.evaluate(u, 0)
        if order == 1:
            return self.base.evaluate(u, 0) - u * self.base.evaluate(u, 1)
        second = self.base.evaluate(u, 2)
        if order == 2:
            return u**3 * second
        return -3 * u**4 * second - u**5 * self.base.evaluate(u, 3)

    def parameters(self) -> dict[str, Any]:
        return {"eps": self.eps}


# Gauss-Legendre rule for the cutoff integral; the bump is flat at both ends
_CUTOFF_NODES, _CUTOFF_WEIGHTS = np.polynomial.legendre.leggauss(128)


def bump(t: FloatArray, order: int = 0) -> FloatArray:
    """exp(-1/(t(1-t))) on (0, 1) and its first two derivatives, zero outside."""
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t)
    inside = (flat > 0) & (flat < 1)
    result = np.zeros_like(flat)
    ti = flat[inside]
    q = ti - ti**2
    value = np.exp(-1.0 / q)
    if order == 0:
        result[inside] = value
    elif order == 1:
        result[inside] = value * (1 - 2 * ti) / q**2
    else:
        g1 = (1 - 2 * ti) / q**2
        g2 = -2 / q**2 - 2 * (1 - 2 * ti) ** 2 / q**3
        result[inside] = value * (g1**2 + g2)
    return result.reshape(t.shape)


def _bump_integral(x: FloatArray) -> FloatArray:
    """Integral of the bump over [0, x] for x in [0, 1]."""
    x = np.asarray(x, dtype=float)
    nodes = 0.5 * x[..., None] * (_CUTOFF_NODES + 1)
    return 0.5 * x * (bump(nodes) @ _CUTOFF_WEIGHTS)


_BUMP_MASS = float(_bump_integral(np.array(1.0)))


@dataclass(frozen=True)
class GluingParams:
    """
    Cutoff eta_delta: 1 on (-inf, 1-2delta], 0 on [1-delta, inf).

    The transition is the normalized integral of exp(-1/(t(1-t))), so
    the m-th derivative scales like delta^-m.
    """

    delta: float
    cutoff: str = "exp-bump-smoothstep"

    def __post_init__(self) -> None:
        if not 0 < self.delta < 0.25:
            raise InvalidParameterError(f"delta must lie in (0, 1/4), got {self.delta}")

    @property
    def start(self) -> float:
        return 1 - 2 * self.delta

    @property
    def end(self) -> float:
        return 1 - self.delta

    def eta(self, s: ArrayLike, order: int = 0) -> FloatArray:
        """Cutoff value or derivative (orders 0..3) at s."""
        s = np.asarray(s, dtype=float)
        x = (s - self.start) / self.delta
        if order == 0:
            clipped = np.clip(x, 0.0, 1.0)
            return 1.0 - _bump_integral(clipped) / _BUMP_MASS
        scale = -1.0 / (_BUMP_MASS * self.delta**order)
        return scale * bump(x, order - 1)


@dataclass(frozen=True)
class GluedProfile(Profile):
    """eta * phi + (1 - eta) * phi_tilde."""

    variant: ClassVar[str] = "glued"

    phi: Profile
    phi_tilde: Profile
    gluing: GluingParams
    e_deviation: float | None = None

    def _derivative(self, s: FloatArray, order: int) -> FloatArray:
        result = np.array(self.phi.evaluate(s, order), dtype=float)
        blended = s > self.gluing.start
        if not np.any(blended):
            return result
        sb = s[blended] if result.ndim else s
        binomials = {0: (1,), 1: (1, 1), 2: (1, 2, 1), 3: (1, 3, 3, 1)}[order]
        total = np.array(self.phi_tilde.evaluate(sb, order), dtype=float)
        for j, weight in enumerate(binomials):
            difference = self.phi.evaluate(sb, order - j) - self.phi_tilde.evaluate(
                sb, order - j
            )
            total = total + weight * self.gluing.eta(sb, j) * difference
        if result.ndim:
            result[blended] = total
            return result
        return total

    def parameters(self) -> dict[str, Any]:
        return {"delta": self.gluing.delta, "cutoff": self.gluing.cutoff}


@dataclass(frozen=True)
class TabulatedProfile(Profile):
    """Even profile interpolated from samples on [0, s_max] by a quintic spline."""

    variant: ClassVar[str] = "tabulated-custom"

    nodes: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.values) or len(self.nodes) < 6:
            raise InvalidParameterError("tabulated profile needs >= 6 matching samples")
        if self.nodes[0] != 0 or np.any(np.diff(self.nodes) <= 0):
            raise InvalidParameterError("tabulated nodes must start at 0 and increase")

    @cached_property
    def _spline(self) -> Any:
        from scipy.interpolate import make_interp_spline

        nodes = np.asarray(self.nodes)
        values = np.asarray(self.values)
        mirrored_nodes = np.concatenate([-nodes[:0:-1], nodes])
        mirrored_values = np.concatenate([values[:0:-1], values])
        return make_interp_spline(mirrored_nodes, mirrored_values, k=5)

    def _derivative(self, s: FloatArray, order: int) -> FloatArray:
        if np.any(s > self.nodes[-1]):
            raise ProfileDomainError(
                f"tabulated profile is defined on [0, {self.nodes[-1]}]"
            )
        return self._spline(s, nu=order)

    def parameters(self) -> dict[str, Any]:
        return {"nodes": list(self.nodes), "values": list(self.values)}


@dataclass(frozen=True)
class FourierData:
    """Cosine coefficients of T_N on the reduced circle."""

    N: int
    coeffs: tuple[float, ...]
    correctors: tuple[float, float, float]
    max_deviation: float | None = None
    profile_deviation: float | None = None
    convexity_margin: float | None = None
    convexity_check: str = "reduced-plane convexity"


@dataclass(frozen=True)
class Integrand:
    """
    Two-sided integrand: |y| phi(|x|/|y|) where |y| >= |x|, else |x| psi(|y|/|x|).
    """

    params: ConeParams
    phi: Profile
    psi: Profile
    jet_mismatch: float = 0.0
    variant: str = "power"
    p: float | None = None
    q: float | None = None
    b_phi: float | None = None
    b_psi: float | None = None
    gluing: GluingParams | None = None
    fourier: FourierData | None = None


@dataclass
class CertificationReport:
    """Outcome of checking the hypotheses of the trapping lemma for one profile."""

    one_jet_ok: bool
    kappa_estimate: float
    second_deriv_margin: float
    convexity_margin: float
    monotonicity_margin: float
    p_inequalities_ok: bool | None
    sample_count: int
    verdict: bool
    e_at_one: float = 0.0
    phi_trapping_margin: float | None = None
    variant: str = ""
    k: int = 0
    l: int = 0
    details: dict[str, Any] = field(default_factory=dict)
