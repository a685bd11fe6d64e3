import pytest

from asymptotics.models import AsymptoticFit
from asymptotics.schemas import AsymptoticFitSchema, MaxRateSchema, SupersolutionReportSchema
from asymptotics.services import area_supersolution_check, mu_max
from integrand.models import ConeParams


class TestAsymptoticSchemas:
    def test_fit_document(self):
        fit = AsymptoticFit(
            a_hat=0.12,
            mu_hat=0.2931,
            window=(1e2, 1e4),
            residual=1e-4,
            samples=200,
            mu_theory=0.291702,
            rel_err=0.0048,
        )

        document = AsymptoticFitSchema().dump(fit)

        assert document["schema"] == "v1"
        assert document["window"] == (1e2, 1e4)
        assert document["phase_mu"] is None
        assert document["rel_err"] == pytest.approx(0.0048)

    def test_max_rate_document(self):
        document = MaxRateSchema().dump(mu_max(ConeParams(3, 3), samples=5))

        assert (document["k"], document["l"]) == (3, 3)
        assert document["dominated"] is True
        assert len(document["sampled_exponents"]) == 5

    def test_supersolution_document(self):
        document = SupersolutionReportSchema().dump(area_supersolution_check(3, [0.5, 1.0, 2.0]))

        assert document["required"] is True
        assert document["passed"] is True
        assert document["max_value"] < 0
        assert len(document["values"]) == 3
