"""
Service module for the asymptotic behavior of leaves: tail fits, the
closed-form decay rate and its supremum, and the area-case barrier.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike

from integrand.models import ConeParams, InvalidParameterError, Profile, ProfileSide
from integrand.services import compat_q, power_profile
from ode.models import DiscriminantError, PhaseTrajectory, ProfileTable

from .models import (
    DEFAULT_WINDOW,
    AsymptoticFit,
    MaxRate,
    SupersolutionReport,
    TailFitError,
)

logger = logging.getLogger(__name__)

FIT_SAMPLES = 200
SUPERSOLUTION_T = np.geomspace(1e-2, 1e3, 400)


def _check_window(window: tuple[float, float], low: float, high: float) -> tuple[float, float]:
    start, end = map(float, window)
    if not 0 < start < end:
        raise InvalidParameterError(f"fit window must satisfy 0 < t_min < t_max, got {window}")
    if start < low or end > high:
        raise InvalidParameterError(
            f"fit window [{start:g}, {end:g}] outside the computed range [{low:g}, {high:g}]"
        )
    return start, end


def mu_theory(profile: Profile, params: ConeParams) -> float:
    """
    (n-1)/2 - sqrt(((n-1)/2)^2 - kl/(phi''(1) n)) with n = k + l.

    phi''(1) is taken relative to phi(1) so that scaling the profile leaves
    the rate unchanged.

    Raises:
        DiscriminantError: If the square root is not of a positive number
    """
    n = params.n
    curvature = profile.evaluate(1.0, 2) / profile.evaluate(1.0)
    discriminant = ((n - 1) / 2) ** 2 - params.k * params.l / (curvature * n)
    if discriminant <= 0:
        raise DiscriminantError(
            f"no real decay rate for (k,l)=({params.k},{params.l}): "
            f"discriminant {discriminant:.6g}"
        )
    return (n - 1) / 2 - math.sqrt(discriminant)


def fit_tail(
    table: ProfileTable,
    window: tuple[float, float] = DEFAULT_WINDOW,
    profile: Profile | None = None,
    params: ConeParams | None = None,
    trajectory: PhaseTrajectory | None = None,
    samples: int = FIT_SAMPLES,
) -> AsymptoticFit:
    """
    Fit sigma(t) = t + a t^-mu on a window by a line through log(sigma - t)
    against log t at log-spaced samples.

    Args:
        table: Leaf table covering the window
        window: (t_min, t_max)
        profile: When given with the table params, the fit is compared with mu_theory
        params: Cone dimensions of the leaf; defaults to table.params
        trajectory: When given, the rate read off the phase trajectory is recorded too
        samples: Number of log-spaced samples

    Raises:
        InvalidParameterError: If the window is not inside the table range
        TailFitError: If sigma - t is not positive throughout the window
    """
    start, end = _check_window(window, max(table.t_min, np.finfo(float).tiny), table.t_max)
    t = np.geomspace(start, end, samples)
    excess = table.evaluate(t) - t
    if np.any(excess <= 0):
        first = float(t[np.argmax(excess <= 0)])
        raise TailFitError(f"sigma - t is not positive at t = {first:.6g}")

    coefficients, residuals, *_ = np.polyfit(np.log(t), np.log(excess), 1, full=True)
    slope, intercept = coefficients
    residual = float(np.sqrt(residuals[0])) if len(residuals) else 0.0

    expected = rel_err = None
    params = params or table.params
    if profile is not None and params is not None:
        expected = mu_theory(profile, params)
        rel_err = abs(-slope - expected) / expected
    phase_mu = phase_rate_estimate(trajectory, (start, end)) if trajectory is not None else None

    fit = AsymptoticFit(
        a_hat=float(np.exp(intercept)),
        mu_hat=float(-slope),
        window=(start, end),
        residual=residual,
        samples=samples,
        mu_theory=expected,
        rel_err=rel_err,
        phase_mu=phase_mu,
    )
    logger.info(
        f"Tail fit on [{start:g}, {end:g}]: a={fit.a_hat:.6g} mu={fit.mu_hat:.6g}"
        + (f" (theory {expected:.6g}, rel err {rel_err:.2e})" if expected is not None else "")
    )
    return fit


def phase_rate_estimate(trajectory: PhaseTrajectory, window: tuple[float, float]) -> float:
    """
    Decay rate from the approach of (w, z) to (1, 1).

    The distance decays like exp(lambda_+ tau) and lambda_+ = -(1 + mu).

    Raises:
        InvalidParameterError: If fewer than three trajectory samples fall in the window
    """
    start, end = np.log(window[0]), np.log(window[1])
    mask = (trajectory.tau >= start) & (trajectory.tau <= end)
    if np.count_nonzero(mask) < 3:
        raise InvalidParameterError(
            f"trajectory has too few samples in t window [{window[0]:g}, {window[1]:g}]"
        )
    distance = np.hypot(trajectory.w[mask] - 1, trajectory.z[mask] - 1)
    slope, _ = np.polyfit(trajectory.tau[mask], np.log(distance), 1)
    return float(-slope - 1)


def mu_max(params: ConeParams, samples: int = 20, seed: int = 0) -> MaxRate:
    """
    (n-1)/2 - sqrt(((n-1)/2)^2 - min(k, l)/5), the largest rate of raw power
    pairs with both exponents at least 6.

    Random compatible pairs (p, q) with p in [6, 30] and q >= 6 are drawn and
    the rate of both sides recorded.
    """
    n = params.n
    bound = ((n - 1) / 2) - math.sqrt(((n - 1) / 2) ** 2 - min(params.k, params.l) / 5)
    rng = np.random.default_rng(seed)
    low = max(6.0, 1 + 5 * params.k / params.l)
    exponents = []
    rates = []
    for p in rng.uniform(low, max(low, 30.0), samples):
        q = compat_q(params, p)
        phi = power_profile(params, ProfileSide.PHI, p, b=0.0)
        psi = power_profile(params, ProfileSide.PSI, q, b=0.0)
        exponents.append((float(p), float(q)))
        rates.append(max(mu_theory(phi, params), mu_theory(psi, params.swapped())))
    result = MaxRate(params=params, mu_max=bound, sampled_exponents=exponents, sampled_rates=rates)
    logger.info(
        f"mu_max for (k,l)=({params.k},{params.l}) is {bound:.7g}; "
        f"largest of {samples} sampled rates {result.largest_sampled:.7g} (seed {seed})"
    )
    return result


def area_operator(k: int, t: ArrayLike) -> np.ndarray:
    """
    sigma'' + k P sigma'/t + k Q/sigma for sigma = (1 + t^4)^(1/4) and the
    area profile, in the cancellation-free form
    ((3 - k) t^2 sigma^2 - k/(t^2 + sigma^2)^2)/sigma^9.
    """
    t = np.asarray(t, dtype=float)
    sigma2 = np.sqrt(1 + t**4)
    sigma = np.sqrt(sigma2)
    return ((3 - k) * t**2 * sigma2 - k / (t**2 + sigma2) ** 2) / sigma**9


def area_supersolution_check(k: int, t_samples: ArrayLike | None = None) -> SupersolutionReport:
    """
    Evaluate the area leaf operator on the barrier (1 + t^4)^(1/4).

    Raises:
        InvalidParameterError: If k < 1 or a sample is not positive
    """
    if k < 1:
        raise InvalidParameterError(f"k must be at least 1, got {k}")
    t = SUPERSOLUTION_T if t_samples is None else np.asarray(t_samples, dtype=float)
    if np.any(t <= 0):
        raise InvalidParameterError("barrier samples must be positive")
    values = area_operator(k, t)
    report = SupersolutionReport(k=k, t=t.tolist(), values=values.tolist())
    logger.info(
        f"Area barrier for k={k}: max operator value {report.max_value:.6g} "
        f"({'supersolution' if report.is_supersolution else 'not a supersolution'})"
    )
    return report
