"""
Truncated cosine series of an integrand on the reduced circle.

An integrand restricted to the quarter circle, f(theta) = F(cos theta, sin theta),
is even about 0 and about pi/2, so only cos(2 m theta) modes appear. The
truncation is corrected at theta = pi/4 by the three lowest modes so that the
restricted profile keeps its value, slope and curvature at s = 1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np
from numpy.polynomial.legendre import leggauss

from config import settings
from integrand.models import (
    ConeParams,
    FloatArray,
    FourierData,
    Integrand,
    InvalidParameterError,
    NonConvexApproximationError,
    Profile,
    ProfileSide,
)
from integrand.services import phi_value

logger = logging.getLogger(__name__)

DIAGONAL = math.pi / 4

# Values, first and second derivatives of 1, cos 2t, cos 4t at t = pi/4
_CORRECTOR_MATRIX = np.array(
    [
        [1.0, 0.0, -1.0],
        [0.0, -2.0, 0.0],
        [0.0, 0.0, 16.0],
    ]
)


def _circle_series(coeffs: FloatArray, theta: FloatArray, order: int) -> FloatArray:
    """order-th theta derivative of sum_m A_m cos(2 m theta)."""
    modes = 2.0 * np.arange(len(coeffs))
    phase = np.multiply.outer(theta, modes)
    # d^j/dt^j cos(w t) = w^j cos(w t + j pi/2)
    terms = modes**order * np.cos(phase + order * math.pi / 2)
    return terms @ coeffs


@dataclass(frozen=True)
class FourierProfile(Profile):
    """
    Profile s -> F(s, 1) of the one-homogeneous extension of a cosine series.

    The psi side stores the series of f(pi/2 - theta), which flips the sign
    of every odd mode.
    """

    variant: ClassVar[str] = "fourier"

    coeffs: tuple[float, ...]
    side: ProfileSide = ProfileSide.PHI
    _array: FloatArray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.coeffs) < 1:
            raise InvalidParameterError("cosine series needs at least one coefficient")
        object.__setattr__(self, "_array", np.asarray(self.coeffs, dtype=float))

    def circle(self, theta: FloatArray, order: int = 0) -> FloatArray:
        """f and its derivatives on the circle."""
        return _circle_series(self._array, np.asarray(theta, dtype=float), order)

    def _derivative(self, s: FloatArray, order: int) -> FloatArray:
        radius = np.hypot(s, 1.0)
        theta = np.arctan2(1.0, s)
        sin, cos = np.sin(theta), np.cos(theta)
        f = self.circle(theta, 0)
        if order == 0:
            return radius * f
        df = self.circle(theta, 1)
        if order == 1:
            return f * cos - df * sin
        g = f + self.circle(theta, 2)
        if order == 2:
            return g * sin**2 / radius
        dg = df + self.circle(theta, 3)
        return -(sin**3 * dg + 3 * sin**2 * cos * g) / radius**2

    def parameters(self) -> dict[str, Any]:
        return {"coeffs": list(self.coeffs), "side": str(self.side)}


def _flip(coeffs: FloatArray) -> FloatArray:
    signs = (-1.0) ** np.arange(len(coeffs))
    return signs * coeffs


def _circle_jets(integrand: Integrand) -> FloatArray:
    """f, f', f'' at theta = pi/4 from the phi profile at s = 1."""
    phi = integrand.phi
    value, slope, curvature = (phi.evaluate(1.0, order) for order in range(3))
    sin = cos = math.sqrt(0.5)
    return np.array(
        [
            sin * value,
            cos * value - slope / sin,
            curvature / sin**3 - sin * value,
        ]
    )


def solve_correctors(jet_deficit: FloatArray) -> FloatArray:
    """
    Coefficients of 1, cos 2t, cos 4t restoring the jet at t = pi/4.

    Args:
        jet_deficit: (value, first, second) derivative differences to add

    Returns:
        The three corrector coefficients
    """
    return np.linalg.solve(_CORRECTOR_MATRIX, np.asarray(jet_deficit, dtype=float))


def _quadrature(N: int, nodes_per_panel: int) -> tuple[FloatArray, FloatArray]:
    """Composite Gauss-Legendre rule on [0, pi/2] with N equal panels."""
    base_nodes, base_weights = leggauss(nodes_per_panel)
    width = (math.pi / 2) / N
    left = width * np.arange(N)
    nodes = (left[:, None] + 0.5 * width * (base_nodes + 1)).ravel()
    weights = np.tile(0.5 * width * base_weights, N)
    return nodes, weights


def _pair_from_coeffs(coeffs: FloatArray) -> tuple[FourierProfile, FourierProfile]:
    return (
        FourierProfile(coeffs=tuple(float(c) for c in coeffs), side=ProfileSide.PHI),
        FourierProfile(
            coeffs=tuple(float(c) for c in _flip(coeffs)), side=ProfileSide.PSI
        ),
    )


def integrand_from_cosine_series(
    params: ConeParams, coeffs: list[float] | tuple[float, ...]
) -> Integrand:
    """Integrand whose circle restriction is sum_m coeffs[m] cos(2 m theta)."""
    array = np.asarray(coeffs, dtype=float)
    phi, psi = _pair_from_coeffs(array)
    return Integrand(
        params=params,
        phi=phi,
        psi=psi,
        variant="fourier",
        fourier=FourierData(
            N=2 * (len(array) - 1),
            coeffs=tuple(float(c) for c in array),
            correctors=(0.0, 0.0, 0.0),
        ),
    )


def fourier_approximate(
    integrand: Integrand,
    N: int,
    nodes_per_panel: int | None = None,
    check_samples: int = 4001,
) -> Integrand:
    """
    Replace an integrand by its corrected truncated cosine series.

    Args:
        integrand: Integrand with matching diagonal jets
        N: Highest retained frequency; even and >= 4
        nodes_per_panel: Gauss-Legendre nodes in each of the N panels
        check_samples: Grid size on [0, pi/2] for the deviation and convexity checks

    Returns:
        Fourier integrand reproducing the one-jet and curvature on the diagonal

    Raises:
        InvalidParameterError: If N is odd or below 4
        NonConvexApproximationError: If f_N + f_N'' is not positive on the circle
    """
    if N < 4 or N % 2:
        raise InvalidParameterError(f"N must be an even integer >= 4, got {N}")
    nodes_per_panel = nodes_per_panel or settings.FOURIER_NODES_PER_MODE

    theta, weights = _quadrature(N, nodes_per_panel)
    samples = np.array(
        [phi_value(integrand, math.cos(t), math.sin(t)) for t in theta]
    )

    modes = np.arange(N // 2 + 1)
    basis = np.cos(2.0 * np.multiply.outer(theta, modes))
    coeffs = (4 / math.pi) * ((samples * weights) @ basis)
    coeffs[0] /= 2

    truncated = np.array([_circle_series(coeffs, np.array(DIAGONAL), j) for j in range(3)])
    correctors = solve_correctors(_circle_jets(integrand) - truncated)
    coeffs[:3] += correctors

    grid = np.linspace(0.0, math.pi / 2, check_samples)
    exact = np.array([phi_value(integrand, math.cos(t), math.sin(t)) for t in grid])
    approx = _circle_series(coeffs, grid, 0)
    max_deviation = float(np.max(np.abs(exact - approx)))
    convexity_margin = float(np.min(approx + _circle_series(coeffs, grid, 2)))

    logger.info(
        f"Fourier approximation N={N}: max deviation {max_deviation:.3e}, "
        f"convexity margin {convexity_margin:.6g}, correctors {correctors.tolist()}"
    )
    if convexity_margin <= 0:
        raise NonConvexApproximationError(
            f"truncated series at N={N} is not convex: min(f + f'') = {convexity_margin:.3e}"
        )

    phi, psi = _pair_from_coeffs(coeffs)
    s = np.linspace(0.0, 1.0, 1001)
    profile_deviation = max(
        float(np.max(np.abs(phi.evaluate(s, order) - integrand.phi.evaluate(s, order))))
        for order in range(3)
    )
    return Integrand(
        params=integrand.params,
        phi=phi,
        psi=psi,
        jet_mismatch=0.0,
        variant="fourier",
        p=integrand.p,
        q=integrand.q,
        b_phi=integrand.b_phi,
        b_psi=integrand.b_psi,
        gluing=integrand.gluing,
        fourier=FourierData(
            N=N,
            coeffs=tuple(float(c) for c in coeffs),
            correctors=(float(correctors[0]), float(correctors[1]), float(correctors[2])),
            max_deviation=max_deviation,
            profile_deviation=profile_deviation,
            convexity_margin=convexity_margin,
        ),
    )
