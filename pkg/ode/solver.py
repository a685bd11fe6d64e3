"""
Leaf solver: fixed-point start near t = 0, Runge-Kutta in t up to t = 1,
then the autonomous phase system in tau = log t until the fixed point (1, 1).
"""

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from integrand.models import ConeParams, InvalidParameterError, Profile

from .models import (
    NonConvergenceError,
    PhaseTrajectory,
    ProfileTable,
    RegionExitError,
    SolverOptions,
    TerminationReason,
    TrappingRegion,
)
from .phase import membership, trapping_region
from .services import el_rhs, leaf_second_derivative_at_zero, phase_field, picard_start

logger = logging.getLogger(__name__)


def _trajectory(
    region: TrappingRegion,
    tau: np.ndarray,
    w: np.ndarray,
    z: np.ndarray,
    termination: TerminationReason,
) -> PhaseTrajectory:
    to_gamma1, to_gamma2, to_barrier = membership(region, w, z)
    return PhaseTrajectory(
        tau=tau,
        w=w,
        z=z,
        dist_gamma1=to_gamma1,
        dist_gamma2=to_gamma2,
        dist_gamma3=to_barrier,
        termination=termination,
        final_distance=float(math.hypot(w[-1] - 1, z[-1] - 1)),
    )


def integrate_phase(
    profile: Profile,
    params: ConeParams,
    tau0: float,
    w0: float,
    z0: float,
    opts: SolverOptions | None = None,
    tau_end: float | None = None,
    region: TrappingRegion | None = None,
) -> PhaseTrajectory:
    """
    Integrate the phase system from (tau0, w0, z0).

    The state is the deviation (w - 1, z - 1), which keeps full relative
    precision on the approach to the fixed point. Integration stops once the
    deviation norm falls to opts.converge_tol, or at tau_end (default
    opts.tau_max).

    Returns:
        Samples every opts.phase_step in tau, plus the stopping point
    """
    opts = opts or SolverOptions()
    region = region or trapping_region(profile, params)
    tau_end = opts.tau_max if tau_end is None else tau_end
    if tau_end <= tau0:
        raise InvalidParameterError(f"tau_end {tau_end} must exceed tau0 {tau0}")

    def rhs(_tau: float, d: np.ndarray) -> list[float]:
        _, second = phase_field(profile, params, 1 + d[0], 1 + d[1])
        return [d[1] - d[0], second]

    def converged(_tau: float, d: np.ndarray) -> float:
        return math.hypot(d[0], d[1]) - opts.converge_tol

    converged.terminal = True  # type: ignore[attr-defined]
    converged.direction = -1  # type: ignore[attr-defined]

    samples = np.arange(tau0, tau_end, opts.phase_step)
    if samples[-1] < tau_end:
        samples = np.append(samples, tau_end)
    solution = solve_ivp(
        rhs,
        (tau0, tau_end),
        [w0 - 1, z0 - 1],
        method="RK45",
        t_eval=samples,
        events=converged,
        rtol=opts.rk_tol,
        atol=min(opts.rk_tol, opts.converge_tol) * 1e-3,
    )
    if solution.status == -1:
        raise NonConvergenceError(f"phase integration failed: {solution.message}")

    tau, deviation = solution.t, solution.y
    termination = TerminationReason.TAU_MAX
    if solution.status == 1:
        termination = TerminationReason.CONVERGED
        tau_event = solution.t_events[0][0]
        if tau_event > tau[-1]:
            tau = np.append(tau, tau_event)
            deviation = np.column_stack([deviation, solution.y_events[0][0]])
    return _trajectory(region, tau, 1 + deviation[0], 1 + deviation[1], termination)


def check_region(trajectory: PhaseTrajectory, tol: float) -> None:
    """
    Raises:
        RegionExitError: Naming the first boundary crossed by more than tol
    """
    for name in ("dist_gamma1", "dist_gamma2", "dist_gamma3"):
        distances = getattr(trajectory, name)
        if np.min(distances) < -tol:
            index = int(np.argmax(distances < -tol))
            raise RegionExitError(
                f"trajectory left the trapping region across {name.removeprefix('dist_')} "
                f"at tau={trajectory.tau[index]:.6g} (w={trajectory.w[index]:.12g}, "
                f"z={trajectory.z[index]:.12g}, distance {distances[index]:.3g})",
                trajectory=trajectory,
            )


def _join(early: PhaseTrajectory, late: PhaseTrajectory) -> PhaseTrajectory:
    def both(name: str) -> np.ndarray:
        return np.concatenate([getattr(early, name), getattr(late, name)[1:]])

    return PhaseTrajectory(
        tau=both("tau"),
        w=both("w"),
        z=both("z"),
        dist_gamma1=both("dist_gamma1"),
        dist_gamma2=both("dist_gamma2"),
        dist_gamma3=both("dist_gamma3"),
        termination=late.termination,
        final_distance=late.final_distance,
    )


def profile_id(profile: Profile) -> str:
    values = ",".join(
        f"{key}={value:.12g}"
        for key, value in sorted(profile.parameters().items())
        if isinstance(value, float | int)
    )
    return f"{profile.variant}({values})" if values else profile.variant


def integrate_leaf(
    profile: Profile, params: ConeParams, opts: SolverOptions | None = None
) -> tuple[ProfileTable, PhaseTrajectory]:
    """
    Solve the leaf equation from sigma(0) = 1, sigma'(0) = 0 out to the fixed
    point of the phase system.

    Args:
        profile: Certified profile
        params: Cone dimensions
        opts: Solver tolerances; defaults come from settings

    Returns:
        The profile table over [0, e^tau_final] and the phase trajectory
        from tau = log(t_switch) onwards

    Raises:
        RegionExitError: If a phase sample leaves the trapping region by more
            than opts.region_tol, or the table breaks a leaf invariant
        NonConvergenceError: If (1, 1) is not reached by opts.tau_max
    """
    opts = opts or SolverOptions()
    region = trapping_region(profile, params)
    start = picard_start(
        profile,
        params,
        opts.t_switch,
        tol=opts.picard_tol,
        nodes=opts.picard_nodes,
        max_iter=opts.picard_max_iter,
    )

    def rhs(t: float, y: np.ndarray) -> list[float]:
        return [y[1], float(el_rhs(profile, params, t, y[0], y[1]))]

    inner = solve_ivp(
        rhs,
        (opts.t_switch, 1.0),
        [start.sigma[-1], start.dsigma[-1]],
        method="RK45",
        t_eval=np.geomspace(opts.t_switch, 1.0, opts.t_samples),
        rtol=opts.rk_tol,
        atol=opts.rk_tol * 1e-3,
    )
    if not inner.success:
        raise NonConvergenceError(f"integration in t failed before t = 1: {inner.message}")
    t_inner, (sigma_inner, dsigma_inner) = inner.t, inner.y
    early = _trajectory(
        region, np.log(t_inner), sigma_inner / t_inner, dsigma_inner, TerminationReason.TAU_MAX
    )
    check_region(early, opts.region_tol)

    late = integrate_phase(
        profile, params, 0.0, sigma_inner[-1], dsigma_inner[-1], opts, region=region
    )
    trajectory = _join(early, late)
    check_region(trajectory, opts.region_tol)
    if trajectory.termination != TerminationReason.CONVERGED:
        raise NonConvergenceError(
            f"trajectory did not reach (1,1) by tau={opts.tau_max}; "
            f"final distance {trajectory.final_distance:.3g}",
            trajectory=trajectory,
        )

    t_outer = np.exp(late.tau[1:])
    t = np.concatenate([start.t, t_inner[1:], t_outer])
    sigma = np.concatenate([start.sigma, sigma_inner[1:], t_outer * late.w[1:]])
    dsigma = np.concatenate([start.dsigma, dsigma_inner[1:], late.z[1:]])
    tail = slice(len(start), None)
    d2sigma = np.concatenate(
        [start.d2sigma, el_rhs(profile, params, t[tail], sigma[tail], dsigma[tail])]
    )
    table = ProfileTable(
        t=t,
        sigma=sigma,
        dsigma=dsigma,
        d2sigma=d2sigma,
        params=params,
        profile_id=profile_id(profile),
        options=opts.as_dict(),
    )
    problems = table.leaf_violations()
    if problems:
        raise RegionExitError(
            f"leaf invariants violated: {'; '.join(problems)}", trajectory=trajectory
        )
    logger.info(
        f"Integrated {profile.variant} leaf for (k,l)=({params.k},{params.l}): "
        f"{len(table)} samples up to t={table.t_max:.4g}, "
        f"final distance {trajectory.final_distance:.3g}"
    )
    return table, trajectory


def el_residual(
    profile: Profile,
    params: ConeParams,
    table: ProfileTable,
    t_min: float | None = None,
    per_arclength: bool = False,
) -> float:
    """
    Largest |sigma'' + k P sigma'/t + l Q/sigma| over interior table samples
    with t > t_min, sigma'' taken from divided differences of sigma'.

    With per_arclength the residual is divided by sqrt(1 + sigma'^2), the
    first variation of the reduced energy in the normal direction.
    """
    if t_min is None:
        t_min = 1.01 * float(table.options.get("t_switch", 0.0))
    second = np.gradient(table.dsigma, table.t, edge_order=2)
    mask = table.t > t_min
    mask[0] = mask[-1] = False
    residual = second[mask] - el_rhs(
        profile, params, table.t[mask], table.sigma[mask], table.dsigma[mask]
    )
    if per_arclength:
        residual = residual / np.hypot(1.0, table.dsigma[mask])
    return float(np.max(np.abs(residual)))


def restore_leaf(
    profile: Profile,
    params: ConeParams,
    table: ProfileTable,
    opts: SolverOptions | None = None,
) -> ProfileTable:
    """
    Leaf table read from a file, with sigma'' recomputed from the leaf
    equation and the solver options it was integrated with.
    """
    opts = opts or SolverOptions()
    d2sigma = np.empty_like(table.t)
    interior = table.t > 0
    d2sigma[~interior] = leaf_second_derivative_at_zero(profile, params)
    d2sigma[interior] = el_rhs(
        profile, params, table.t[interior], table.sigma[interior], table.dsigma[interior]
    )
    return ProfileTable(
        t=table.t,
        sigma=table.sigma,
        dsigma=table.dsigma,
        d2sigma=d2sigma,
        params=params,
        profile_id=profile_id(profile),
        options=opts.as_dict(),
    )
