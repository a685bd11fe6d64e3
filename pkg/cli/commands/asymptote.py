"""Fit the decay rate of a leaf file and compare it with the closed form.

Usage:
    lawsonlab asymptote --k 1 --l 1 --p 6 --window 1e5,1e7
    lawsonlab asymptote --area --k 3 --l 3
"""

import logging
from typing import Any

from asymptotics.models import DEFAULT_WINDOW
from asymptotics.schemas import (
    AsymptoticFitSchema,
    MaxRateSchema,
    SupersolutionReportSchema,
)
from asymptotics.services import area_supersolution_check, fit_tail, mu_max
from ode.tables import read_trajectory

from ..base import BaseCommand
from ..config import RunConfig
from ..reports import write_report

logger = logging.getLogger(__name__)

RATE_TOLERANCE = 0.02


class AsymptoteCommand(BaseCommand):
    name = "asymptote"
    help = "Fit sigma(t) = t + a t^-mu on a window; exit 0 iff mu is within 2% of theory"

    def handle(self, config: RunConfig) -> int:
        integrand = self.build_integrand(config)
        window = config.window or DEFAULT_WINDOW
        document: dict[str, Any] = {"variant": integrand.variant}
        ok = True
        for side, profile, params in self.sides(integrand, config.both_sides):
            table = self.read_leaf(config, side, profile, params)
            phase_path = config.out / f"phase_{side}.csv"
            trajectory = read_trajectory(phase_path) if phase_path.exists() else None
            fit = fit_tail(table, window, profile=profile, params=params, trajectory=trajectory)
            document[side] = AsymptoticFitSchema().dump(fit)
            ok = ok and fit.within(RATE_TOLERANCE)

        document["mu_max"] = MaxRateSchema().dump(mu_max(integrand.params, seed=config.seed))
        if config.area:
            report = area_supersolution_check(integrand.params.k)
            document["supersolution"] = SupersolutionReportSchema().dump(report)

        write_report(config.out, "asymptote", document, config.format)
        return 0 if ok else 1
