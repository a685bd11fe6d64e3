"""Integrate the unit leaf of each side and write the tables.

Usage:
    lawsonlab solve --k 1 --l 1 --p 6 --b 0.01
    lawsonlab solve --area --k 3 --l 3
    lawsonlab solve --k 1 --l 2 --p 6 --q 11 --both-sides --rk-tol 1e-11
"""

import logging
from typing import Any

from asymptotics.schemas import SupersolutionReportSchema
from asymptotics.services import area_supersolution_check
from integrand.models import ConeParams, Profile
from integrand.schemas import CertificationReportSchema
from integrand.services import certify_profile
from ode.models import (
    DiscriminantError,
    NonConvergenceError,
    PhaseTrajectory,
    RegionExitError,
    TerminationReason,
)
from ode.phase import linearization
from ode.schemas import LinearizationSchema
from ode.solver import el_residual, integrate_leaf
from ode.tables import write_profile_table, write_trajectory

from ..base import BaseCommand
from ..config import RunConfig
from ..reports import write_report

logger = logging.getLogger(__name__)


def _trajectory_summary(trajectory: PhaseTrajectory | None) -> dict[str, Any]:
    if trajectory is None:
        return {}
    return {
        "termination": str(trajectory.termination),
        "final_distance": trajectory.final_distance,
        "phase_samples": len(trajectory),
        "min_dist_gamma1": float(trajectory.dist_gamma1.min()),
        "min_dist_gamma2": float(trajectory.dist_gamma2.min()),
        "min_dist_gamma3": float(trajectory.dist_gamma3.min()),
    }


class SolveCommand(BaseCommand):
    name = "solve"
    help = "Integrate the leaf equation; exit 0 iff every leaf converged inside its region"

    def admissible(
        self,
        config: RunConfig,
        side: str,
        profile: Profile,
        params: ConeParams,
        summary: dict[str, Any],
    ) -> bool:
        """
        Certification of the profile, or for the area integrand with k = l the
        barrier (1 + t^4)^(1/4) that replaces the lower boundary of the region.
        """
        if config.area and params.k == params.l:
            barrier = area_supersolution_check(params.k)
            summary["supersolution"] = SupersolutionReportSchema().dump(barrier)
            return barrier.is_supersolution
        report = certify_profile(profile, params)
        summary["certification"] = CertificationReportSchema().dump(report)
        return report.verdict

    def solve_side(
        self, config: RunConfig, side: str, profile: Profile, params: ConeParams
    ) -> tuple[bool, dict[str, Any]]:
        summary: dict[str, Any] = {"k": params.k, "l": params.l}
        if not config.force and not self.admissible(config, side, profile, params, summary):
            logger.error(f"{side} profile failed certification; pass --force to solve anyway")
            summary["termination"] = "not_certified"
            return False, summary

        try:
            summary["linearization"] = LinearizationSchema().dump(
                linearization(profile, params)
            )
            table, trajectory = integrate_leaf(profile, params, config.solver)
        except DiscriminantError as e:
            logger.error(f"{side}: {e}")
            summary.update(termination="discriminant", message=str(e))
            return False, summary
        except (NonConvergenceError, RegionExitError) as e:
            logger.error(f"{side}: {e}")
            summary.update(_trajectory_summary(e.trajectory))
            if isinstance(e, RegionExitError):
                summary["termination"] = str(TerminationReason.REGION_EXIT)
            summary["message"] = str(e)
            return False, summary

        write_profile_table(table, config.out / f"leaf_{side}.csv")
        write_trajectory(trajectory, config.out / f"phase_{side}.csv")
        summary.update(_trajectory_summary(trajectory))
        summary.update(
            table_samples=len(table),
            t_max=table.t_max,
            el_residual=el_residual(profile, params, table),
            min_distance=trajectory.min_distance,
        )
        return trajectory.termination == TerminationReason.CONVERGED, summary

    def handle(self, config: RunConfig) -> int:
        integrand = self.build_integrand(config)
        document: dict[str, Any] = {
            "variant": integrand.variant,
            "solver": config.solver.as_dict(),
        }
        ok = True
        for side, profile, params in self.sides(integrand, config.both_sides):
            converged, summary = self.solve_side(config, side, profile, params)
            logger.info(f"{side} leaf: {summary.get('termination')}")
            document[side] = summary
            ok = ok and converged

        write_report(config.out, "solve", document, config.format)
        return 0 if ok else 1
