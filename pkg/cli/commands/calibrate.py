"""Finite-difference divergence of the calibration field built from a leaf file.

Usage:
    lawsonlab calibrate --k 1 --l 1 --p 6 --grid 0.2,0.8,1.2,2.0,1e-3
"""

import logging
from typing import Any

from foliation.models import CalibrationGrid
from foliation.schemas import CalibrationReportSchema
from foliation.services import divergence_check, unit_leaf

from ..base import BaseCommand
from ..config import DEFAULT_GRID, RunConfig
from ..reports import write_report
from .foliate import LEAF_SIDES

logger = logging.getLogger(__name__)


class CalibrateCommand(BaseCommand):
    name = "calibrate"
    help = "Check that the calibration field is divergence free on a grid"

    def handle(self, config: RunConfig) -> int:
        integrand = self.build_integrand(config)
        grid = config.grid or CalibrationGrid.parse(DEFAULT_GRID)
        document: dict[str, Any] = {"variant": integrand.variant}
        ok = True
        for side, profile, params in self.sides(integrand, config.both_sides):
            table = self.read_leaf(config, side, profile, params)
            leaf = unit_leaf(table, LEAF_SIDES[side])
            # The x side grid is the mirror image of the y side one.
            side_grid = grid
            if side == "psi":
                side_grid = CalibrationGrid(
                    grid.v_min, grid.v_max, grid.u_min, grid.u_max, grid.h, grid.points
                )
            report = divergence_check(integrand, leaf, side_grid, seed=config.seed)
            logger.info(
                f"{side}: max |div| {report.max_abs_divergence}, "
                f"order {report.convergence_order:.3f}, passed={report.passed}"
            )
            document[side] = CalibrationReportSchema().dump(report)
            ok = ok and report.passed

        write_report(config.out, "calibrate", document, config.format)
        return 0 if ok else 1
