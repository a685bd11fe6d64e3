"""
Service module for assembling leaves into a foliation of one side of the
cone and checking the calibration field built from their normals.
"""

import logging
import math
from collections.abc import Callable
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq

from integrand.models import ConeParams, Integrand, InvalidParameterError, Profile
from integrand.services import phi_full_array
from ode.models import ProfileTable
from ode.solver import el_residual

from .models import (
    CalibrationGrid,
    CalibrationReport,
    FoliationReport,
    Leaf,
    LeafDomainError,
    LeafSide,
)

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]

NEWTON_MAX_ITER = 200


def unit_leaf(table: ProfileTable, side: LeafSide | str = LeafSide.Y_SIDE) -> Leaf:
    return Leaf(side=LeafSide(side), table=table, scale=1.0)


def dilate_leaf(leaf: Leaf, factor: float) -> Leaf:
    """
    Raises:
        InvalidParameterError: If factor <= 0
    """
    if not factor > 0:
        raise InvalidParameterError(f"dilation factor must be positive, got {factor}")
    return Leaf(side=leaf.side, table=leaf.table, scale=leaf.scale * factor)


def _support_gap(leaf: Leaf, t: Any) -> Any:
    """sigma(t) - t sigma'(t), the derivative of lambda sigma(a/lambda) in lambda."""
    return leaf.table.evaluate(t) - t * leaf.table.evaluate(t, 1)


def _validate_points(leaf: Leaf, argument: np.ndarray, height: np.ndarray) -> None:
    if np.any(argument < 0) or np.any(height <= argument):
        raise LeafDomainError(f"points must lie strictly inside the {leaf.side} of the cone")
    lowest = argument / leaf.table.t_max
    if np.any(lowest * leaf.table.sigma[-1] >= height):
        raise LeafDomainError(
            f"point too close to the cone for the computed leaf (t_max = {leaf.table.t_max:.4g})"
        )


def leaf_through_point(leaf: Leaf, point: tuple[float, float]) -> float:
    """
    Scale of the dilation of the unit leaf passing through a reduced point.

    lambda -> lambda sigma(a/lambda) is increasing and convex, so the root is
    bracketed between a/t_max and the height b.

    Args:
        leaf: Leaf whose table is the unit leaf
        point: Reduced coordinates (u, v)

    Returns:
        lambda with |b - lambda sigma(a/lambda)| <= 1e-12 b

    Raises:
        LeafDomainError: If the point is on or beyond the cone, or too close
            to it for the computed table
    """
    argument, height = leaf.to_leaf_coordinates(float(point[0]), float(point[1]))
    _validate_points(leaf, np.array(argument), np.array(height))
    if argument == 0:
        return height

    def excess(scale: float) -> float:
        return scale * leaf.table.evaluate(argument / scale) - height

    scale = brentq(
        excess,
        argument / leaf.table.t_max * (1 + 1e-12),
        height,
        xtol=1e-15 * height,
        rtol=4 * np.finfo(float).eps,
        maxiter=200,
    )
    for _ in range(3):
        residual = excess(scale)
        if abs(residual) <= 1e-13 * height:
            break
        scale -= residual / _support_gap(leaf, argument / scale)
    return float(scale)


def leaf_scales(leaf: Leaf, u: ArrayLike, v: ArrayLike) -> np.ndarray:
    """
    Vector form of leaf_through_point.

    Newton's method started at lambda = b decreases monotonically to the
    root since lambda sigma(a/lambda) is increasing and convex.
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    argument, height = leaf.to_leaf_coordinates(u, v)
    _validate_points(leaf, argument, height)
    scale = height.copy()
    for _ in range(NEWTON_MAX_ITER):
        t = argument / scale
        step = (scale * leaf.table.evaluate(t) - height) / _support_gap(leaf, t)
        scale = scale - step
        if np.all(np.abs(step) <= 1e-15 * scale):
            break
    else:
        logger.warning(f"leaf scale iteration stopped after {NEWTON_MAX_ITER} steps")
    return scale


def _unit_normal(leaf: Leaf, t: Any) -> tuple[Any, Any]:
    """Normal of every dilation at unit-leaf parameter t."""
    slope = leaf.table.evaluate(t, 1)
    norm = np.hypot(1.0, slope)
    return leaf.from_leaf_coordinates(-slope / norm, 1.0 / norm)


def normal_at(leaf: Leaf, t: ArrayLike) -> tuple[Any, Any]:
    """
    Unit normal of the leaf at parameter t in reduced (u, v) components.

    On the y side this is (-sigma', 1)/sqrt(1 + sigma'^2), pointing towards
    increasing v; on the x side the components are exchanged.
    """
    return _unit_normal(leaf, np.asarray(t, dtype=float) / leaf.scale)


def calibration_fields(
    integrand: Integrand, leaf: Leaf, u: ArrayLike, v: ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    """
    grad F(nu) at reduced points, nu the normal of the leaf through each point.

    The field depends only on the family of dilations, so any member may be passed.
    """
    scale = leaf_scales(leaf, u, v)
    argument, _ = leaf.to_leaf_coordinates(*np.broadcast_arrays(u, v))
    normal_u, normal_v = _unit_normal(leaf, np.asarray(argument, dtype=float) / scale)
    _, grad_u, grad_v = phi_full_array(integrand, normal_u, normal_v)
    return grad_u, grad_v


def calibration_field(
    integrand: Integrand, leaf: Leaf, point: tuple[float, float]
) -> tuple[float, float]:
    grad_u, grad_v = calibration_fields(integrand, leaf, point[0], point[1])
    return float(grad_u), float(grad_v)


def reduced_divergence(
    field: Field, params: ConeParams, u: np.ndarray, v: np.ndarray, h: float
) -> np.ndarray:
    """
    Divergence in R^{k+l+2} of the equivariant field (g1(u, v) x/|x|, g2(u, v) y/|y|):
    dg1/du + k g1/u + dg2/dv + l g2/v, with centered differences of spacing h.
    """
    g1, g2 = field(u, v)
    right, _ = field(u + h, v)
    left, _ = field(u - h, v)
    _, up = field(u, v + h)
    _, down = field(u, v - h)
    return (
        (right - left) / (2 * h)
        + params.k * g1 / u
        + (up - down) / (2 * h)
        + params.l * g2 / v
    )


def _validate_grid(leaf: Leaf, grid: CalibrationGrid) -> None:
    if leaf.side == LeafSide.Y_SIDE:
        to_cone, to_axis = grid.v_min - grid.u_max, grid.u_min
    else:
        to_cone, to_axis = grid.u_min - grid.v_max, grid.v_min
    if to_cone < 10 * grid.h or to_axis < 10 * grid.h:
        raise LeafDomainError(
            f"grid must stay 10h = {10 * grid.h:.3g} away from the cone and the axis "
            f"on the {leaf.side} (distances {to_cone:.3g}, {to_axis:.3g})"
        )


def support_check(
    integrand: Integrand,
    normal_u: np.ndarray,
    normal_v: np.ndarray,
    samples: int = 1000,
    seed: int = 0,
    tol: float = 1e-12,
) -> int:
    """
    Count pairs (nu, omega) violating <grad F(nu), omega> <= F(omega) for
    random unit omega.
    """
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2 * np.pi, samples)
    omega_u, omega_v = np.cos(angles), np.sin(angles)
    _, grad_u, grad_v = phi_full_array(integrand, normal_u.ravel(), normal_v.ravel())
    values, _, _ = phi_full_array(integrand, omega_u, omega_v)
    pairing = np.outer(grad_u, omega_u) + np.outer(grad_v, omega_v)
    return int(np.count_nonzero(pairing - values[None, :] > tol))


def divergence_check(
    integrand: Integrand,
    leaf: Leaf,
    grid: CalibrationGrid,
    support_samples: int = 1000,
    seed: int = 0,
) -> CalibrationReport:
    """
    Divergence of the calibration field at the grid nodes for spacings
    h, h/2 and h/4, with the Euler identity and the support inequality at
    the same nodes.

    Raises:
        LeafDomainError: If the grid stencil comes within 10h of the cone or axis
    """
    _validate_grid(leaf, grid)
    u, v = grid.nodes()

    def field(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return calibration_fields(integrand, leaf, a, b)

    spacings = [grid.h, grid.h / 2, grid.h / 4]
    maxima = [
        float(np.max(np.abs(reduced_divergence(field, integrand.params, u, v, h))))
        for h in spacings
    ]
    ratios = [
        maxima[0] / maxima[1] if maxima[1] else math.inf,
        maxima[1] / maxima[2] if maxima[2] else math.inf,
    ]
    order = (
        math.log2(maxima[0] / maxima[2]) / 2 if maxima[2] > 0 and maxima[0] > 0 else math.nan
    )

    scale = leaf_scales(leaf, u, v)
    argument, _ = leaf.to_leaf_coordinates(u, v)
    normal_u, normal_v = _unit_normal(leaf, argument / scale)
    values, grad_u, grad_v = phi_full_array(integrand, normal_u, normal_v)
    euler_error = float(np.max(np.abs(grad_u * normal_u + grad_v * normal_v - values)))
    violations = support_check(
        integrand, normal_u, normal_v, samples=support_samples, seed=seed
    )

    logger.info(
        f"Divergence on {leaf.side} grid: max |div| {maxima[0]:.3e}, {maxima[1]:.3e}, "
        f"{maxima[2]:.3e} (order {order:.2f}); Euler error {euler_error:.2e}; "
        f"{violations} support violations"
    )
    return CalibrationReport(
        grid=grid,
        side=str(leaf.side),
        spacings=spacings,
        max_abs_divergence=maxima,
        refinement_ratios=ratios,
        convergence_order=order,
        euler_identity_max_error=euler_error,
        support_inequality_violations=violations,
        support_samples=support_samples,
        details={"profile_id": leaf.table.profile_id, "leaf_samples": len(leaf.table)},
    )


def foliation_check(
    leaf: Leaf,
    profile: Profile,
    params: ConeParams,
    samples: int = 1000,
    seed: int = 0,
    radii: tuple[float, float] = (0.5, 4.0),
    cone_margin: float = 0.1,
) -> FoliationReport:
    """
    Sample the working annulus of the leaf's side and check that the
    dilations of the unit leaf foliate it.

    For each random point: the root residual of leaf_through_point, strict
    growth of lambda with the height, and agreement of a one-sided
    difference of lambda with 1/(sigma - t sigma'). Pairs of dilations are
    checked for disjointness, and the unit leaf for sigma - t > 0
    decreasing.

    Args:
        leaf: Unit leaf of the side
        profile: Profile the leaf was computed from
        params: Cone dimensions of the leaf equation (swapped on the x side)
        samples: Number of random points
        seed: Seed of the sampling
        radii: Radial range of the annulus
        cone_margin: Angular distance in radians kept from the cone
    """
    rng = np.random.default_rng(seed)
    logger.info(f"Foliation check on {leaf.side} with {samples} points, seed {seed}")
    radius = rng.uniform(*radii, samples)
    angle = rng.uniform(0.0, np.pi / 4 - cone_margin, samples)
    argument, height = radius * np.sin(angle), radius * np.cos(angle)
    u, v = leaf.from_leaf_coordinates(argument, height)

    scales = np.array(
        [leaf_through_point(leaf, (a, b)) for a, b in zip(u, v, strict=True)]
    )
    residual = np.abs(scales * leaf.table.evaluate(argument / scales) - height) / height

    base = leaf_scales(leaf, u, v)
    step = 1e-7 * height
    raised = leaf_scales(leaf, *leaf.from_leaf_coordinates(argument, height + step))
    monotonicity_violations = int(np.count_nonzero(raised <= base))
    expected = 1.0 / _support_gap(leaf, argument / base)
    mismatch = np.abs((raised - base) / step - expected) / expected

    low, high = np.sort(rng.uniform(0.1, 10.0, (2, 100)), axis=0)
    sampled = np.linspace(0.0, 10.0, 101)
    inner = low[:, None] * leaf.table.evaluate(sampled[None, :] / low[:, None])
    outer = high[:, None] * leaf.table.evaluate(sampled[None, :] / high[:, None])
    disjointness_violations = int(np.count_nonzero(inner >= outer))

    positive = leaf.table.t > 0
    excess = leaf.table.sigma[positive] - leaf.table.t[positive]

    return FoliationReport(
        side=str(leaf.side),
        samples=samples,
        max_relative_residual=float(np.max(residual)),
        monotonicity_violations=monotonicity_violations,
        disjointness_violations=disjointness_violations,
        max_derivative_mismatch=float(np.max(mismatch)),
        min_excess=float(np.min(excess)),
        excess_decreasing=bool(np.all(np.diff(excess) < 0)),
        first_variation_residual=el_residual(profile, params, leaf.table, per_arclength=True),
    )
