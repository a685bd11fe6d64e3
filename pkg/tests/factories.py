from pathlib import Path

import factory

from cli.config import RunConfig
from integrand.models import ConeParams, GluingParams, ProfileSide
from integrand.services import build_integrand, compat_q, power_profile


class ConeParamsFactory(factory.Factory):
    class Meta:
        model = ConeParams

    k = 1
    l = 1


class PowerProfileFactory(factory.Factory):
    class Meta:
        model = power_profile

    params = factory.SubFactory(ConeParamsFactory)  # type: ignore
    side = ProfileSide.PHI
    p = 6.0
    b = 0.01


class RawPowerProfileFactory(PowerProfileFactory):
    b = 0.0


class IntegrandFactory(factory.Factory):
    class Meta:
        model = build_integrand

    params = factory.SubFactory(ConeParamsFactory)  # type: ignore
    p = 6.0
    q = factory.LazyAttribute(lambda obj: compat_q(obj.params, obj.p))  # type: ignore
    b_phi = 0.01
    b_psi = None
    gluing = None


class GluedIntegrandFactory(IntegrandFactory):
    params = factory.SubFactory(ConeParamsFactory, k=1, l=2)  # type: ignore
    b_phi = 0.0
    gluing = factory.LazyFunction(lambda: GluingParams(delta=0.05))  # type: ignore


class RunConfigFactory(factory.Factory):
    class Meta:
        model = RunConfig

    command = "certify"
    k = 1
    l = 1
    p = 6.0
    b_phi = 0.01
    seed = 0
    jobs = 1
    out = factory.LazyFunction(lambda: Path("out"))  # type: ignore
