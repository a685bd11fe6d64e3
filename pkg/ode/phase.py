"""
Phase-plane geometry around the fixed point (1, 1): linearization, the
trapping region and the flow condition on its lower boundary.
"""

import logging
import math
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from integrand.models import ConeParams, FloatArray, Profile

from .models import DiscriminantError, LinearizationData, TrappingRegion
from .services import phase_field

logger = logging.getLogger(__name__)


def linearization(profile: Profile, params: ConeParams) -> LinearizationData:
    """
    Jacobian of the phase field at (1, 1) with its closed-form spectrum.

    The curvature enters through phi''(1)/phi(1), which equals phi''(1) for
    profiles with phi(1) = 1 and keeps the result invariant under scaling
    of the profile.

    Raises:
        DiscriminantError: If the eigenvalues are not real and distinct
    """
    k, l, n = params.k, params.l, params.n
    curvature = profile.evaluate(1.0, 2) / profile.evaluate(1.0)
    coupling = k * l / (curvature * n)
    discriminant = ((n - 1) / 2) ** 2 - coupling
    if discriminant <= 0:
        raise DiscriminantError(
            f"discriminant {discriminant:.6g} <= 0 for (k,l)=({k},{l}); "
            f"phi''(1)/phi(1) = {curvature:.6g} is below {4 * k * l / (n * (n - 1) ** 2):.6g}"
        )
    root = math.sqrt(discriminant)
    lambda_plus = -(n + 1) / 2 + root
    lambda_minus = -(n + 1) / 2 - root
    mu = (n - 1) / 2 - root

    matrix = np.array([[-1.0, 1.0], [-coupling, -float(n)]])
    eigenvalues, eigenvectors = np.linalg.eig(matrix)
    order = np.argsort(eigenvalues.real)[::-1]
    numeric = eigenvalues.real[order]
    vectors = eigenvectors[:, order].real
    numeric_slopes = vectors[1] / vectors[0]
    slopes = (1 + lambda_plus, 1 + lambda_minus)
    eigenvalue_error = float(np.max(np.abs(numeric - [lambda_plus, lambda_minus])))
    slope_error = float(np.max(np.abs(numeric_slopes - slopes)))
    logger.debug(
        f"Linearization for (k,l)=({k},{l}): lambda=({lambda_plus:.12g}, "
        f"{lambda_minus:.12g}) mu={mu:.12g} eigen error {eigenvalue_error:.2g}"
    )
    return LinearizationData(
        M=((-1.0, 1.0), (-coupling, -float(n))),
        lambda_plus=lambda_plus,
        lambda_minus=lambda_minus,
        mu=mu,
        slopes=slopes,
        numeric_eigenvalues=(float(numeric[0]), float(numeric[1])),
        eigenvalue_error=eigenvalue_error,
        slope_error=slope_error,
    )


def trapping_region(profile: Profile, params: ConeParams) -> TrappingRegion:
    return TrappingRegion(
        params=params,
        profile=profile,
        barrier=TrappingRegion.barrier_for(profile, params),
    )


def membership(region: TrappingRegion, w: ArrayLike, z: ArrayLike) -> tuple[Any, Any, Any]:
    """
    Signed distances from (w, z) to Gamma1, Gamma2 and the lower barrier.

    Positive values are inside the region. Curve distances are first-order
    estimates |w - w_curve(z)| / sqrt(1 + w_curve'(z)^2).
    """
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    positive = np.where(z > 0, z, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        to_gamma2 = np.where(
            z > 0,
            (region.gamma2(positive) - w) / np.hypot(1.0, region.gamma2_slope(positive)),
            np.inf,
        )
        to_barrier = np.where(
            z > 0,
            (w - region.gamma3(positive)) / np.hypot(1.0, region.gamma3_slope(positive)),
            w - region.gamma3(0.0) if region.barrier == "line" else np.inf,
        )
    return z.copy() if z.ndim else float(z), to_gamma2, to_barrier


def inside(region: TrappingRegion, w: float, z: float, tol: float = 0.0) -> bool:
    return all(float(distance) >= -tol for distance in membership(region, w, z))


def gamma3_flow_margins(region: TrappingRegion, samples: int = 1001) -> FloatArray:
    """
    (dz/dw of the barrier) - V2/V1 at sample points of the barrier, z in (0, 1).

    All margins positive means the flow crosses the barrier into the region.
    """
    z = np.linspace(0.0, 1.0, samples + 2)[1:-1]
    w = region.gamma3(z)
    first, second = phase_field(region.profile, region.params, w, z)
    return 1.0 / region.gamma3_slope(z) - second / first
