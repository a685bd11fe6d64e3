"""
Service module for constructing, evaluating and certifying integrand profiles.
"""

import logging
import math
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq

from config import settings
from integrand.models import (
    AreaProfile,
    CertificationReport,
    ConeParams,
    EllipticProfile,
    GluedProfile,
    GluingParams,
    IncompatibleIntegrandError,
    Integrand,
    InvalidParameterError,
    OutOfRangeError,
    PowerProfile,
    Profile,
    ProfileDomainError,
    ProfileSide,
    ReflectedProfile,
)

logger = logging.getLogger(__name__)

ONE_JET_TOL = 1e-9


def power_profile(
    params: ConeParams, side: ProfileSide | str, p: float, b: float = 0.01
) -> PowerProfile:
    """
    Build phi(s) = a + b s^2 + c |s|^p with the one-jet fixed at s = 1.

    The coefficients solve a + b + c = 1 and 2b + pc = r, where r = l/(k+l)
    on the phi side and k/(k+l) on the psi side.

    Args:
        params: Cone dimensions
        side: "phi" or "psi"
        p: Exponent, must exceed 2
        b: Quadratic regularization; 0 gives the raw power profile

    Returns:
        The power profile

    Raises:
        InvalidParameterError: If p <= 2 or b leaves c or a nonpositive
    """
    side = ProfileSide(side)
    if not p > 2:
        raise InvalidParameterError(f"exponent must exceed 2, got p={p}")
    if b < 0:
        raise InvalidParameterError(f"quadratic coefficient must be >= 0, got b={b}")

    r = params.slope(side)
    c = (r - 2 * b) / p
    a = 1 - b - c
    if c <= 0:
        raise InvalidParameterError(
            f"b={b} too large for p={p}: c={c:.6g} must be positive (need b < {r / 2:.6g})"
        )
    if a <= 0:
        raise InvalidParameterError(f"b={b} gives nonpositive constant term a={a:.6g}")
    return PowerProfile(a=a, b=b, c=c, p=p, side=side)


def area_profile() -> AreaProfile:
    return AreaProfile()


def elliptic_pair(params: ConeParams) -> tuple[EllipticProfile, EllipticProfile]:
    """
    Normalized elliptic profiles sqrt(alpha s^2 + beta) satisfying the one-jet.

    The phi side uses alpha = l/(k+l), beta = k/(k+l); the psi side exchanges them.
    For k = l this is the area integrand scaled by 1/sqrt(2).
    """
    alpha = params.l / params.n
    beta = params.k / params.n
    return EllipticProfile(alpha=alpha, beta=beta), EllipticProfile(
        alpha=beta, beta=alpha
    )


def profile_eval(profile: Profile, s: ArrayLike, order: int = 0) -> Any:
    """Evaluate the order-th derivative of a profile at s."""
    return profile.evaluate(s, order)


def reflect_profile(profile: Profile, eps: float = 1e-3) -> ReflectedProfile:
    """Return s -> s * profile(1/s), rejecting evaluations at |s| <= eps."""
    return ReflectedProfile(base=profile, eps=eps)


def jet_difference(first: Profile, second: Profile, s: float = 1.0) -> float:
    """Largest difference of value, first and second derivative at s."""
    return max(
        abs(first.evaluate(s, order) - second.evaluate(s, order)) for order in range(3)
    )


def diagonal_jet_mismatch(phi: Profile, psi: Profile) -> float:
    """Second-order mismatch at s = 1 between phi and the reflection of psi."""
    return jet_difference(phi, reflect_profile(psi))


def e_kl(profile: Profile, params: ConeParams, s: ArrayLike) -> Any:
    """
    Trapping quantity E_kl(phi)(s), linear in (phi, phi', phi'').

    Args:
        profile: Profile phi
        params: Cone dimensions
        s: Scalar or array in [0, 1]

    Returns:
        E_kl(phi)(s) with the same shape as s
    """
    k, l, n = params.k, params.l, params.n
    s = np.asarray(s, dtype=float)
    value = profile.evaluate(s, 0)
    first = profile.evaluate(s, 1)
    second = profile.evaluate(s, 2)
    result = (
        l * (n - 1) / (n + 1) * value
        - (k + (l - 2 * n / (n + 1)) * s) * first
        - ((n + 1) / 2 - s) * (1 - s) * second
    )
    if np.ndim(result) == 0:
        return float(result)
    return result


def second_deriv_threshold(params: ConeParams) -> float:
    """Lower bound 4kl/((k+l)(k+l-1)^2) that phi''(1) must exceed."""
    k, l, n = params.k, params.l, params.n
    return 4 * k * l / (n * (n - 1) ** 2)


def first_order_ok(params: ConeParams, p: float) -> bool:
    """p - 1 > 4k/(k+l-1)^2."""
    return p - 1 > 4 * params.k / (params.n - 1) ** 2


def second_order_value(params: ConeParams, p: float) -> float:
    """Left side of the quadratic condition in p - 1; admissible when >= 0."""
    k, l, n = params.k, params.l, params.n
    m = p - 1
    return (
        m**2
        - ((k + 2 * l + 2) / n + 4 / (n * (n - 1))) * m
        + 4 * k / (n * (n - 1))
    )


def power_trapping_margins(
    params: ConeParams, p: float, samples: int = 2001
) -> dict[str, float]:
    """
    Polynomial form of the trapping inequality for the raw power profile.

    For phi = 1 - l/(p(k+l)) + l/(p(k+l)) s^p one has
    E_kl(phi) = (l/(k+l)) s^{p-2} (R(s) - L(s)) with
    L(s) = [(p-1)((k+l+1)/2 - s) + ks](1-s) and
    R(s) = (k+l-1)(k+l-l/p)/(k+l+1) (s^{2-p} - s^2).

    Returns:
        Dictionary with min of (R - L)/(1 - s) on (0, 1) and the two endpoint
        margins L'(1) - R'(1) and R''(1) - L''
    """
    k, l, n = params.k, params.l, params.n
    s = np.linspace(0, 1, samples)[1:-1]
    constant = (n - 1) * (n - l / p) / (n + 1)
    left = ((p - 1) * ((n + 1) / 2 - s) + k * s) * (1 - s)
    right = constant * (s ** (2 - p) - s**2)

    left_slope_at_one = -((p - 1) * ((n + 1) / 2 - 1) + k)
    right_slope_at_one = constant * ((2 - p) - 2)
    left_curvature = 2 * ((p - 1) - k)
    right_curvature_at_one = constant * ((2 - p) * (1 - p) - 2)
    return {
        "interior_margin": float(np.min((right - left) / (1 - s))),
        "first_order_margin": left_slope_at_one - right_slope_at_one,
        "second_order_margin": right_curvature_at_one - left_curvature,
    }


def certify_profile(
    profile: Profile, params: ConeParams, samples: int | None = None
) -> CertificationReport:
    """
    Check the one-jet, trapping, second-derivative, convexity and monotonicity
    hypotheses for a profile on a uniform grid.

    Failures are recorded in the report rather than raised.

    Args:
        profile: Profile to certify (psi sides are certified with swapped params)
        params: Cone dimensions
        samples: Grid size on [0, 1]; defaults to settings.KAPPA_SAMPLES

    Returns:
        CertificationReport with every margin filled in
    """
    samples = samples or settings.KAPPA_SAMPLES
    s = np.linspace(0.0, 1.0, samples)
    details: dict[str, Any] = {}

    try:
        value_at_one = profile.evaluate(1.0, 0)
        slope_at_one = profile.evaluate(1.0, 1)
        one_jet_ok = (
            abs(value_at_one - 1) <= ONE_JET_TOL
            and abs(slope_at_one - params.l / params.n) <= ONE_JET_TOL
        )

        trapping = e_kl(profile, params, s)
        ratios = trapping[:-1] / (1 - s[:-1])
        # E(s)/(1-s) at s = 1 is -E'(1); one-sided difference
        limit = (trapping[-2] - trapping[-1]) / (s[-1] - s[-2])
        kappa = float(min(np.min(ratios), limit))

        second_deriv_margin = profile.evaluate(1.0, 2) - second_deriv_threshold(
            params
        )

        symmetric = np.linspace(-1.0, 1.0, 2 * samples - 1)
        convexity_margin = float(np.min(profile.evaluate(symmetric, 2)))

        monotonicity_margin = float(
            np.min(profile.evaluate(s, 0) - s * profile.evaluate(s, 1))
        )
        e_at_one = float(trapping[-1])
    except ProfileDomainError as e:
        logger.warning(f"Certification aborted, profile not evaluable on [0, 1]: {e}")
        return CertificationReport(
            one_jet_ok=False,
            kappa_estimate=-math.inf,
            second_deriv_margin=-math.inf,
            convexity_margin=-math.inf,
            monotonicity_margin=-math.inf,
            p_inequalities_ok=None,
            sample_count=samples,
            verdict=False,
            variant=profile.variant,
            k=params.k,
            l=params.l,
            details={"error": str(e)},
        )

    p_inequalities_ok = None
    phi_trapping_margin = None
    if isinstance(profile, PowerProfile):
        first = first_order_ok(params, profile.p)
        second = second_order_value(params, profile.p) >= 0
        p_inequalities_ok = bool(first and second)
        details["first_order_ok"] = bool(first)
        details["second_order_ok"] = bool(second)
        if profile.is_raw:
            margins = power_trapping_margins(params, profile.p)
            phi_trapping_margin = margins["interior_margin"]
            details.update(margins)

    verdict = bool(
        one_jet_ok
        and kappa > 0
        and second_deriv_margin > 0
        and convexity_margin > 0
        and monotonicity_margin > 0
        and p_inequalities_ok is not False
    )

    report = CertificationReport(
        one_jet_ok=bool(one_jet_ok),
        kappa_estimate=kappa,
        second_deriv_margin=float(second_deriv_margin),
        convexity_margin=convexity_margin,
        monotonicity_margin=monotonicity_margin,
        p_inequalities_ok=p_inequalities_ok,
        sample_count=samples,
        verdict=verdict,
        e_at_one=e_at_one,
        phi_trapping_margin=phi_trapping_margin,
        variant=profile.variant,
        k=params.k,
        l=params.l,
        details=details,
    )
    logger.info(
        f"Certified {profile.variant} profile for (k,l)=({params.k},{params.l}): "
        f"verdict={verdict} kappa={kappa:.6g} "
        f"second_deriv_margin={second_deriv_margin:.6g}"
    )
    return report


def compat_q(params: ConeParams, p: float) -> float:
    """
    Exponent q with l(p - 1) = k(q - 1).

    Raises:
        InvalidParameterError: If p <= 2 or the resulting q <= 2
    """
    if not p > 2:
        raise InvalidParameterError(f"exponent must exceed 2, got p={p}")
    q = 1 + params.l * (p - 1) / params.k
    if q <= 2:
        raise InvalidParameterError(
            f"compatible exponent q={q:.6g} must exceed 2 for (k,l,p)=({params.k},{params.l},{p})"
        )
    return q


def matched_b_psi(p: float, q: float, b_phi: float) -> float:
    """
    Quadratic coefficient for psi giving phi''(1) = psi''(1).

    With the exponents compatible, b_phi (p - 2) = b_psi (q - 2) keeps the
    regularized pair in second-order agreement across the diagonal.
    """
    return b_phi * (p - 2) / (q - 2)


def admissible_pair(params: ConeParams, p: float = 6.0) -> tuple[float, float]:
    """
    Exponents (p, q) with q = compat_q(p) >= 6, raising p through even values.
    """
    if not p > 2:
        raise InvalidParameterError(f"exponent must exceed 2, got p={p}")
    q = 1 + params.l * (p - 1) / params.k
    while q < 6:
        p = 2 * math.floor(p / 2) + 2
        q = 1 + params.l * (p - 1) / params.k
    return p, q


def legendre_slope(profile: Profile, xi: float, eps: float = 0.25) -> float:
    """
    Derivative of the Legendre transform: the s with phi'(s) = xi.

    Uses bracketing root finding followed by Newton polishing.

    Args:
        profile: Even uniformly convex profile
        xi: Target slope
        eps: Working interval is [-1-eps, 1+eps]

    Returns:
        s with |phi'(s) - xi| <= 1e-12

    Raises:
        OutOfRangeError: If xi is outside phi' on the working interval
    """
    if xi == 0:
        return 0.0
    if xi < 0:
        return -legendre_slope(profile, -xi, eps)

    upper = 1 + eps
    top = profile.evaluate(upper, 1)
    if xi > top:
        raise OutOfRangeError(
            f"slope {xi:.6g} outside derivative range [-{top:.6g}, {top:.6g}]"
        )

    root = brentq(
        lambda s: profile.evaluate(s, 1) - xi,
        0.0,
        upper,
        xtol=1e-15,
        rtol=4 * np.finfo(float).eps,
        maxiter=200,
    )
    for _ in range(3):
        residual = profile.evaluate(root, 1) - xi
        if abs(residual) <= 1e-14:
            break
        root -= residual / profile.evaluate(root, 2)
    return float(root)


def legendre_slopes(profile: Profile, xis: ArrayLike, eps: float = 0.25) -> np.ndarray:
    """Vector form of legendre_slope."""
    xis = np.asarray(xis, dtype=float)
    return np.array([legendre_slope(profile, float(x), eps) for x in xis.ravel()]).reshape(
        xis.shape
    )


def glue_profiles(
    phi: Profile,
    phi_tilde: Profile,
    gluing: GluingParams,
    params: ConeParams | None = None,
    jet_tol: float | None = None,
) -> GluedProfile:
    """
    Convex combination eta_delta phi + (1 - eta_delta) phi_tilde.

    Args:
        phi: Profile used away from s = 1
        phi_tilde: Profile used near s = 1
        gluing: Cutoff parameters
        params: When given, the maximal |E_kl(glued) - E_kl(phi)| on the
            transition interval is measured and stored on the result
        jet_tol: Second-order agreement required at s = 1

    Returns:
        The glued profile

    Raises:
        IncompatibleIntegrandError: If the jets at s = 1 disagree beyond jet_tol
    """
    jet_tol = settings.JET_TOL if jet_tol is None else jet_tol
    mismatch = jet_difference(phi, phi_tilde)
    if mismatch > jet_tol:
        raise IncompatibleIntegrandError(
            f"profiles disagree to second order at s=1 by {mismatch:.3e} (tolerance {jet_tol:.1e})"
        )

    glued = GluedProfile(phi=phi, phi_tilde=phi_tilde, gluing=gluing)
    if params is None:
        return glued

    s = np.linspace(gluing.start, gluing.end, 2001)
    deviation = float(np.max(np.abs(e_kl(glued, params, s) - e_kl(phi, params, s))))
    logger.debug(f"Gluing with delta={gluing.delta}: max E_kl deviation {deviation:.3e}")
    return GluedProfile(
        phi=phi, phi_tilde=phi_tilde, gluing=gluing, e_deviation=deviation
    )


def build_integrand(
    params: ConeParams,
    p: float,
    q: float,
    b_phi: float = 0.01,
    b_psi: float | None = None,
    gluing: GluingParams | None = None,
    jet_tol: float | None = None,
) -> Integrand:
    """
    Two-sided power integrand, optionally smoothed across the diagonal by gluing.

    Args:
        params: Cone dimensions
        p: phi exponent
        q: psi exponent
        b_phi: phi regularization
        b_psi: psi regularization; defaults to matched_b_psi(p, q, b_phi)
        gluing: When given, phi is replaced by its gluing to s psi(1/s)
        jet_tol: Diagonal second-order tolerance

    Returns:
        Integrand carrying the measured diagonal jet mismatch

    Raises:
        IncompatibleIntegrandError: If the diagonal jets disagree beyond jet_tol
    """
    jet_tol = settings.JET_TOL if jet_tol is None else jet_tol
    if b_psi is None:
        b_psi = matched_b_psi(p, q, b_phi)

    phi = power_profile(params, ProfileSide.PHI, p, b_phi)
    psi = power_profile(params, ProfileSide.PSI, q, b_psi)
    mismatch = diagonal_jet_mismatch(phi, psi)

    if gluing is None:
        if mismatch > jet_tol:
            raise IncompatibleIntegrandError(
                f"diagonal jets differ by {mismatch:.3e}: l(p-1)={params.l * (p - 1):.6g}, "
                f"k(q-1)={params.k * (q - 1):.6g}, b_psi should be "
                f"{matched_b_psi(p, q, b_phi):.6g}"
            )
        logger.info(
            f"Built power integrand (k,l,p,q)=({params.k},{params.l},{p},{q}), "
            f"jet mismatch {mismatch:.3e}"
        )
        return Integrand(
            params=params,
            phi=phi,
            psi=psi,
            jet_mismatch=mismatch,
            variant="power",
            p=p,
            q=q,
            b_phi=b_phi,
            b_psi=b_psi,
        )

    glued = glue_profiles(phi, reflect_profile(psi), gluing, params, jet_tol)
    mismatch = diagonal_jet_mismatch(glued, psi)
    logger.info(
        f"Built glued integrand (k,l,p,q,delta)=({params.k},{params.l},{p},{q},"
        f"{gluing.delta}), E_kl deviation {glued.e_deviation:.3e}"
    )
    return Integrand(
        params=params,
        phi=glued,
        psi=psi,
        jet_mismatch=mismatch,
        variant="glued",
        p=p,
        q=q,
        b_phi=b_phi,
        b_psi=b_psi,
        gluing=gluing,
    )


def integrand_from_profiles(
    params: ConeParams,
    phi: Profile,
    psi: Profile,
    variant: str,
    jet_tol: float | None = None,
) -> Integrand:
    """
    Wrap an arbitrary profile pair, checking the diagonal jet agreement.

    Raises:
        IncompatibleIntegrandError: If the diagonal jets disagree beyond jet_tol
    """
    jet_tol = settings.JET_TOL if jet_tol is None else jet_tol
    mismatch = diagonal_jet_mismatch(phi, psi)
    if mismatch > jet_tol:
        raise IncompatibleIntegrandError(
            f"diagonal jets of the {variant} pair differ by {mismatch:.3e}"
        )
    return Integrand(
        params=params, phi=phi, psi=psi, jet_mismatch=mismatch, variant=variant
    )


def elliptic_integrand(params: ConeParams) -> Integrand:
    """Integrand sqrt((l u^2 + k v^2)/(k+l)); the scaled area integrand when k = l."""
    phi, psi = elliptic_pair(params)
    variant = "area" if params.k == params.l else "elliptic"
    return integrand_from_profiles(params, phi, psi, variant)


def phi_full(integrand: Integrand, u: float, v: float) -> tuple[float, tuple[float, float]]:
    """
    Reduced integrand F(u, v) and its gradient, u = |x| and v = |y|.

    Args:
        integrand: Two-sided integrand
        u: |x|, nonnegative
        v: |y|, nonnegative

    Returns:
        (F, (F_u, F_v))

    Raises:
        InvalidParameterError: At the origin or for negative arguments
    """
    if u < 0 or v < 0:
        raise InvalidParameterError(f"phi_full expects u, v >= 0, got ({u}, {v})")
    if u == 0 and v == 0:
        raise InvalidParameterError("phi_full is not defined at the origin")

    if v >= u:
        s = u / v
        value = integrand.phi.evaluate(s, 0)
        slope = integrand.phi.evaluate(s, 1)
        return v * value, (slope, value - s * slope)

    s = v / u
    value = integrand.psi.evaluate(s, 0)
    slope = integrand.psi.evaluate(s, 1)
    return u * value, (value - s * slope, slope)


def phi_gradient(integrand: Integrand, a: float, b: float) -> tuple[float, float]:
    """Gradient of F at a point of the reduced plane with signed coordinates."""
    _, (grad_u, grad_v) = phi_full(integrand, abs(a), abs(b))
    return math.copysign(grad_u, a), math.copysign(grad_v, b)


def phi_value(integrand: Integrand, a: float, b: float) -> float:
    """F at a point of the reduced plane with signed coordinates."""
    value, _ = phi_full(integrand, abs(a), abs(b))
    return value


def phi_full_array(
    integrand: Integrand, a: ArrayLike, b: ArrayLike
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vector form of phi_full for signed reduced coordinates away from the origin.

    Returns:
        (F, F_a, F_b) arrays of the broadcast shape
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    u, v = np.abs(a), np.abs(b)
    if np.any((u == 0) & (v == 0)):
        raise InvalidParameterError("phi_full is not defined at the origin")
    upper = v >= u
    s = np.where(upper, u, v) / np.where(upper, v, u)
    phi, phi_slope = integrand.phi.evaluate(s), integrand.phi.evaluate(s, 1)
    psi, psi_slope = integrand.psi.evaluate(s), integrand.psi.evaluate(s, 1)
    value = np.where(upper, v * phi, u * psi)
    grad_u = np.where(upper, phi_slope, psi - s * psi_slope)
    grad_v = np.where(upper, phi - s * phi_slope, psi_slope)
    return value, np.copysign(grad_u, a), np.copysign(grad_v, b)
