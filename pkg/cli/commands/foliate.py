"""Check that dilations of the unit leaf foliate each side and minimize energy.

Usage:
    lawsonlab foliate --k 1 --l 1 --p 6 --b 0.01 --samples 400
    lawsonlab foliate --area --k 3 --l 3 --window 0.5,2 --eps 5e-3
"""

import logging
from argparse import ArgumentParser
from typing import Any

from foliation.energy import perturbation_test
from foliation.models import LeafSide
from foliation.schemas import FoliationReportSchema, PerturbationReportSchema
from foliation.services import foliation_check, unit_leaf
from integrand.models import ConeParams, Profile
from ode.models import ProfileTable
from ode.solver import integrate_leaf
from ode.tables import write_profile_table

from ..base import BaseCommand
from ..config import RunConfig
from ..reports import write_report, write_rows

logger = logging.getLogger(__name__)

DEFAULT_INTERVAL = (0.5, 3.0)
LEAF_SIDES = {"phi": LeafSide.Y_SIDE, "psi": LeafSide.X_SIDE}


class FoliateCommand(BaseCommand):
    name = "foliate"
    help = "Foliation and energy checks on the computed leaves"

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument(
            "--trials", type=int, help="Number of random perturbations (default 20)"
        )
        parser.add_argument(
            "--eps", type=float, help="Perturbation amplitude in (0, 0.01] (default 0.01)"
        )

    def leaf_table(
        self, config: RunConfig, side: str, profile: Profile, params: ConeParams
    ) -> ProfileTable:
        """Leaf written by solve, or a fresh integration when there is none."""
        path = config.leaf if config.leaf and side == "phi" else config.out / f"leaf_{side}.csv"
        if path.exists():
            return self.read_leaf(config, side, profile, params)
        logger.info(f"No leaf file at {path}; integrating the {side} leaf")
        table, _ = integrate_leaf(profile, params, config.solver)
        write_profile_table(table, config.out / f"leaf_{side}.csv")
        return table

    def handle(self, config: RunConfig) -> int:
        integrand = self.build_integrand(config)
        interval = config.window or DEFAULT_INTERVAL
        document: dict[str, Any] = {"variant": integrand.variant, "seed": config.seed}
        ok = True
        for side, profile, params in self.sides(integrand, config.both_sides):
            table = self.leaf_table(config, side, profile, params)
            leaf = unit_leaf(table, LEAF_SIDES[side])

            foliation = foliation_check(leaf, profile, params, seed=config.seed)
            energy = perturbation_test(
                profile,
                params,
                table,
                interval,
                trials=config.trials,
                eps=config.eps,
                seed=config.seed,
            )
            logger.info(
                f"{side}: foliation passed={foliation.passed}, "
                f"min energy change {energy.min_delta_energy:.3e}"
            )
            document[side] = {
                "foliation": FoliationReportSchema().dump(foliation),
                "perturbation": PerturbationReportSchema().dump(energy),
            }
            ok = ok and foliation.passed and energy.passed

            u, v = leaf.points(config.samples)
            write_rows(
                config.out / f"leaf_points_{side}.csv",
                ("u", "v"),
                ({"u": a, "v": b} for a, b in zip(u.tolist(), v.tolist(), strict=True)),
            )

        write_report(config.out, "foliate", document, config.format)
        return 0 if ok else 1
