"""
Equations of the leaf problem: the coefficients P and Q, the second-order
equation in t, the series and fixed-point starts near t = 0, and the
autonomous phase field in (w, z).
"""

import logging
import math
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike
from scipy.interpolate import make_interp_spline

from integrand.models import (
    ConeParams,
    InvalidParameterError,
    OutOfRangeError,
    Profile,
)
from integrand.services import legendre_slopes

from .models import DegenerateConvexityError, PicardDivergenceError, ProfileTable

logger = logging.getLogger(__name__)

QUADRATURE_ORDER = 32


def coefficients(profile: Profile, s: ArrayLike) -> tuple[Any, Any]:
    """
    P(s) = phi'(s)/(s phi''(s)) and Q(s) = (s phi'(s) - phi(s))/phi''(s).

    P(0) is taken as its limit 1.

    Raises:
        DegenerateConvexityError: If phi''(s) <= 0 at any requested point
    """
    values = np.asarray(s, dtype=float)
    phi = profile.evaluate(values)
    first = profile.evaluate(values, 1)
    second = profile.evaluate(values, 2)
    if np.any(np.asarray(second) <= 0):
        raise DegenerateConvexityError(
            f"phi'' must be positive, minimum is {float(np.min(second)):.6g}"
        )
    safe = np.where(values == 0, 1.0, values)
    P = np.where(values == 0, 1.0, first / (safe * second))
    Q = (values * first - phi) / second
    if np.ndim(P) == 0:
        return float(P), float(Q)
    return P, Q


def el_rhs(
    profile: Profile, params: ConeParams, t: ArrayLike, sigma: ArrayLike, dsigma: ArrayLike
) -> Any:
    """sigma'' from the leaf equation, for t > 0."""
    P, Q = coefficients(profile, dsigma)
    t, sigma, dsigma = (np.asarray(v, dtype=float) for v in (t, sigma, dsigma))
    return -params.k * P * dsigma / t - params.l * Q / sigma


def leaf_second_derivative_at_zero(profile: Profile, params: ConeParams) -> float:
    second = profile.evaluate(0.0, 2)
    if second <= 0:
        raise DegenerateConvexityError(f"phi''(0) = {second:.6g}, series start undefined")
    return params.l * profile.evaluate(0.0) / ((params.k + 1) * second)


def taylor_start(profile: Profile, params: ConeParams, t0: float) -> tuple[float, float]:
    """
    Second-order jet of the leaf at t0.

    Returns:
        (sigma(t0), sigma'(t0)) from sigma''(0) = l phi(0) / ((k+1) phi''(0))
    """
    if not 0 < t0 <= 1e-2:
        raise InvalidParameterError(f"t0 must lie in (0, 1e-2], got {t0}")
    curvature = leaf_second_derivative_at_zero(profile, params)
    return 1 + curvature * t0**2 / 2, curvature * t0


def _integrate_slopes(t: np.ndarray, dsigma: np.ndarray) -> tuple[Any, Any]:
    slope = make_interp_spline(t, dsigma, k=3)
    antiderivative = slope.antiderivative()
    offset = float(antiderivative(t[0]))
    return slope, lambda x: 1 + antiderivative(x) - offset


def picard_start(
    profile: Profile,
    params: ConeParams,
    t0: float,
    tol: float = 1e-13,
    nodes: int = 201,
    max_iter: int = 60,
) -> ProfileTable:
    """
    Leaf on [0, t0] as the fixed point of the integrated leaf equation.

    Iterates sigma' <- (phi')^-1( l / (t^k sigma^l) int_0^t s^k sigma^(l-1) phi(sigma') ds )
    from sigma' = 0 on a uniform grid, with sigma = 1 + int sigma'.

    Raises:
        PicardDivergenceError: If the iterates stop contracting, leave the
            slope range, or reach |sigma'| >= 1
    """
    if t0 <= 0 or tol <= 0:
        raise InvalidParameterError("t0 and tol must be positive")
    k, l = params.k, params.l
    t = np.linspace(0.0, t0, nodes)
    x, weights = leggauss(QUADRATURE_ORDER)
    x = (x + 1) / 2
    weights = weights / 2 * x**k
    scaled = t[1:, None] * x[None, :]

    dsigma = np.zeros_like(t)
    previous_step = math.inf
    for iteration in range(1, max_iter + 1):
        slope, sigma = _integrate_slopes(t, dsigma)
        inner = sigma(scaled) ** (l - 1) * profile.evaluate(slope(scaled))
        xi = np.zeros_like(t)
        xi[1:] = l * t[1:] * (inner @ weights) / sigma(t[1:]) ** l
        try:
            updated = legendre_slopes(profile, xi)
        except OutOfRangeError as e:
            raise PicardDivergenceError(
                f"Picard iterate {iteration} left the slope range on [0, {t0}] ({e}); "
                "try a smaller t0"
            ) from e
        if np.max(np.abs(updated)) >= 1:
            raise PicardDivergenceError(
                f"Picard iterate {iteration} reached |sigma'| >= 1 on [0, {t0}]; "
                "try a smaller t0"
            )
        step = float(np.max(np.abs(updated - dsigma)))
        dsigma = updated
        if step <= tol:
            break
        if iteration > 2 and step > previous_step:
            raise PicardDivergenceError(
                f"Picard iteration is not contracting on [0, {t0}] "
                f"(step {step:.3g} after {previous_step:.3g}); try a smaller t0"
            )
        previous_step = step
    else:
        raise PicardDivergenceError(
            f"Picard iteration did not reach {tol:.1e} in {max_iter} iterations "
            f"on [0, {t0}]; try a smaller t0"
        )

    _, sigma = _integrate_slopes(t, dsigma)
    sigma_values = np.asarray(sigma(t), dtype=float)
    sigma_values[0] = 1.0
    d2sigma = np.empty_like(t)
    d2sigma[0] = leaf_second_derivative_at_zero(profile, params)
    d2sigma[1:] = el_rhs(profile, params, t[1:], sigma_values[1:], dsigma[1:])
    logger.debug(f"Picard start on [0, {t0}] converged after {iteration} iterations")
    return ProfileTable(
        t=t, sigma=sigma_values, dsigma=dsigma, d2sigma=d2sigma, params=params
    )


def phase_field(
    profile: Profile, params: ConeParams, w: ArrayLike, z: ArrayLike
) -> tuple[Any, Any]:
    """V(w, z) = (z - w, -l Q(z)/w - k z P(z))."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise InvalidParameterError("phase field needs w > 0")
    P, Q = coefficients(profile, z)
    z = np.asarray(z, dtype=float)
    first = z - w
    second = -params.l * Q / w - params.k * z * P
    if np.ndim(first) == 0:
        return float(first), float(second)
    return first, second
