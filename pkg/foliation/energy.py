"""
Reduced anisotropic energy of a profile curve and the perturbation test of
local minimality.
"""

import logging
import math

import numpy as np
from scipy.integrate import simpson

from integrand.models import ConeParams, InvalidParameterError, Profile, bump
from ode.models import ProfileTable

from .models import LeafDomainError, PerturbationReport, PerturbationTrial

logger = logging.getLogger(__name__)

ENERGY_NODES = 4097
MAX_REDRAWS = 100


def _integrate(values: np.ndarray, t: np.ndarray) -> tuple[float, float]:
    """Simpson's rule with one Richardson step; returns (value, error estimate)."""
    fine = simpson(values, x=t)
    coarse = simpson(values[::2], x=t[::2])
    correction = (fine - coarse) / 15
    return float(fine + correction), float(abs(correction))


def _energy_density(
    profile: Profile, params: ConeParams, t: np.ndarray, sigma: np.ndarray, dsigma: np.ndarray
) -> np.ndarray:
    return t**params.k * sigma**params.l * profile(dsigma)


def _check_interval(table: ProfileTable, interval: tuple[float, float]) -> tuple[float, float]:
    start, end = map(float, interval)
    if start > end:
        raise InvalidParameterError(f"interval must satisfy a <= b, got {interval}")
    if start < table.t_min or end > table.t_max:
        raise LeafDomainError(
            f"interval [{start}, {end}] outside the table range "
            f"[{table.t_min}, {table.t_max:.6g}]"
        )
    return start, end


def reduced_energy(
    profile: Profile,
    params: ConeParams,
    table: ProfileTable,
    interval: tuple[float, float],
    nodes: int = ENERGY_NODES,
) -> float:
    """
    Integral of t^k sigma^l phi(sigma') over [a, b].

    Args:
        profile: Profile phi of the integrand
        params: Cone dimensions (k, l)
        table: Profile table to integrate
        interval: Integration interval inside the table range
        nodes: Odd number of Simpson nodes

    Raises:
        LeafDomainError: If the interval leaves the table range
    """
    start, end = _check_interval(table, interval)
    if start == end:
        return 0.0
    t = np.linspace(start, end, nodes)
    value, error = _integrate(
        _energy_density(profile, params, t, table.evaluate(t), table.evaluate(t, 1)), t
    )
    if error > 1e-9 * abs(value):
        logger.warning(f"Energy quadrature error estimate {error:.2e} on [{start}, {end}]")
    return value


def perturbation_test(
    profile: Profile,
    params: ConeParams,
    table: ProfileTable,
    interval: tuple[float, float],
    trials: int = 20,
    eps: float = 1e-2,
    seed: int = 0,
    q_tol: float = 1e-10,
) -> PerturbationReport:
    """
    Compare the energy of sigma + eps eta with that of sigma for random
    bumps eta supported inside the interval.

    Each bump is a scaled, translated copy of exp(-1/(x(1-x))) normalized to
    height about its half width. For each bump the energy change is sampled
    at +-eps and +-eps/2 and fitted by c eps^2.

    Raises:
        InvalidParameterError: If eps is not in (0, 0.01] or trials < 1
        LeafDomainError: If the interval is not strictly inside the table range
    """
    if not 0 < eps <= 1e-2:
        raise InvalidParameterError(f"eps must lie in (0, 0.01], got {eps}")
    if trials < 1:
        raise InvalidParameterError("at least one trial is needed")
    start, end = _check_interval(table, interval)
    if not (table.t_min < start < end < table.t_max):
        raise LeafDomainError("perturbation interval must lie strictly inside the table range")

    rng = np.random.default_rng(seed)
    inside = (table.t >= start) & (table.t <= end)
    spacing = float(np.max(np.diff(table.t[inside]))) if np.count_nonzero(inside) > 1 else 0.0
    min_width = max(5 * spacing, (end - start) * 1e-3)
    max_width = (end - start) / 2
    if min_width >= max_width:
        raise LeafDomainError(
            f"interval [{start}, {end}] is too short for the table spacing {spacing:.3g}"
        )

    epsilons = [eps, -eps, eps / 2, -eps / 2]
    results: list[PerturbationTrial] = []
    redrawn = 0
    while len(results) < trials:
        width = rng.uniform(min_width, max_width)
        center = rng.uniform(start + width, end - width)
        sign = int(rng.choice([-1, 1]))
        t = np.linspace(center - width, center + width, ENERGY_NODES)
        x = (t - (center - width)) / (2 * width)
        eta = sign * width * math.e**4 * bump(x, 0)
        deta = sign * math.e**4 * bump(x, 1) / 2

        sigma, dsigma = table.evaluate(t), table.evaluate(t, 1)
        if np.max(np.abs(dsigma)) + eps * np.max(np.abs(deta)) >= 1:
            redrawn += 1
            if redrawn > MAX_REDRAWS:
                raise LeafDomainError("no admissible bump found; try a smaller eps")
            logger.warning(
                f"Redrawing bump at {center:.4g} (width {width:.3g}): slope leaves (-1, 1)"
            )
            continue

        base, _ = _integrate(_energy_density(profile, params, t, sigma, dsigma), t)
        changes = []
        for epsilon in epsilons:
            perturbed, _ = _integrate(
                _energy_density(
                    profile, params, t, sigma + epsilon * eta, dsigma + epsilon * deta
                ),
                t,
            )
            changes.append(perturbed - base)

        squares = np.square(epsilons)
        fitted = float(np.dot(changes, squares) / np.dot(squares, squares))
        misfit = np.asarray(changes) - fitted * squares
        scale = max(np.max(np.abs(changes)), np.finfo(float).tiny)
        fit_residual = float(np.sqrt(np.mean(misfit**2)) / scale)
        logger.debug(
            f"Bump at {center:.4g} width {width:.3g} sign {sign:+d}: "
            f"min dE {min(changes):.3e}, c {fitted:.3e}"
        )
        results.append(
            PerturbationTrial(
                center=center,
                width=width,
                sign=sign,
                epsilons=epsilons,
                delta_energy=changes,
                fitted_c=fitted,
                fit_residual=fit_residual,
            )
        )

    report = PerturbationReport(
        interval=(start, end), eps=eps, q_tol=q_tol, trials=results, redrawn=redrawn
    )
    logger.info(
        f"Perturbation test on [{start}, {end}]: {trials} trials, "
        f"min dE {report.min_delta_energy:.3e}, min c {report.min_fitted_c:.3e}"
    )
    return report
