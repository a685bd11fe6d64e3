"""Check the trapping hypotheses for both profiles of an integrand.

Usage:
    lawsonlab certify --k 1 --l 1 --p 6 --b 0.01
    lawsonlab certify --k 1 --l 2 --p 6 --q 11 --delta 0.1
"""

import logging

from integrand.schemas import CertificationReportSchema, IntegrandSchema
from integrand.services import certify_profile

from ..base import BaseCommand
from ..config import RunConfig
from ..reports import write_report

logger = logging.getLogger(__name__)


class CertifyCommand(BaseCommand):
    name = "certify"
    help = "Certify the phi and psi profiles; exit 0 iff both verdicts hold"

    def handle(self, config: RunConfig) -> int:
        integrand = self.build_integrand(config)
        schema = CertificationReportSchema()
        reports = {}
        for side, profile, params in self.sides(integrand, both=True):
            report = certify_profile(profile, params)
            logger.info(
                f"{side} ({params.k},{params.l}): verdict={report.verdict} "
                f"kappa={report.kappa_estimate:.3e} "
                f"second_deriv_margin={report.second_deriv_margin:.3e}"
            )
            reports[side] = report

        write_report(
            config.out,
            "certify",
            {
                "integrand": IntegrandSchema().dump(integrand),
                **{side: schema.dump(report) for side, report in reports.items()},
            },
            config.format,
        )
        return 0 if all(report.verdict for report in reports.values()) else 1
