from collections.abc import Callable
from typing import Any

from integrand.fourier import integrand_from_cosine_series
from integrand.models import (
    ConeParams,
    FourierData,
    GluingParams,
    Integrand,
    InvalidParameterError,
)
from integrand.services import build_integrand, elliptic_integrand

IntegrandBuilder = Callable[[ConeParams, dict[str, Any]], Integrand]


def _build_power(params: ConeParams, document: dict[str, Any]) -> Integrand:
    return build_integrand(
        params,
        p=document["p"],
        q=document["q"],
        b_phi=document.get("b_phi", 0.01),
        b_psi=document.get("b_psi"),
    )


def _build_glued(params: ConeParams, document: dict[str, Any]) -> Integrand:
    return build_integrand(
        params,
        p=document["p"],
        q=document["q"],
        b_phi=document.get("b_phi", 0.01),
        b_psi=document.get("b_psi"),
        gluing=GluingParams(delta=document["delta"]),
    )


def _build_elliptic(params: ConeParams, document: dict[str, Any]) -> Integrand:
    return elliptic_integrand(params)


def _build_fourier(params: ConeParams, document: dict[str, Any]) -> Integrand:
    fourier = document.get("fourier") or {}
    if not fourier.get("coeffs"):
        raise InvalidParameterError("fourier integrand document needs fourier.coeffs")
    integrand = integrand_from_cosine_series(params, fourier["coeffs"])
    stored = integrand.fourier
    assert stored is not None
    return Integrand(
        params=params,
        phi=integrand.phi,
        psi=integrand.psi,
        variant="fourier",
        p=document.get("p"),
        q=document.get("q"),
        b_phi=document.get("b_phi"),
        b_psi=document.get("b_psi"),
        fourier=FourierData(
            N=fourier.get("N", stored.N),
            coeffs=stored.coeffs,
            correctors=tuple(fourier.get("correctors", stored.correctors)),  # type: ignore[arg-type]
        ),
    )


class IntegrandRegistry:
    """Registry of integrand builders keyed by the document variant tag."""

    BUILDER_MAP: dict[str, IntegrandBuilder] = {
        "power": _build_power,
        "glued": _build_glued,
        "area": _build_elliptic,
        "elliptic": _build_elliptic,
        "fourier": _build_fourier,
    }

    @classmethod
    def get(cls, variant: str) -> IntegrandBuilder | None:
        """Get builder for variant. Returns None if not found."""
        return cls.BUILDER_MAP.get(variant)


def integrand_from_document(document: dict[str, Any]) -> Integrand:
    """
    Rebuild an integrand from its JSON document.

    Raises:
        InvalidParameterError: For an unknown variant or missing fields
    """
    variant = document.get("variant", "")
    builder = IntegrandRegistry.get(variant)
    if builder is None:
        raise InvalidParameterError(f"unknown integrand variant {variant!r}")
    params = ConeParams(k=document["k"], l=document["l"])
    try:
        return builder(params, document)
    except KeyError as e:
        raise InvalidParameterError(
            f"{variant} integrand document is missing {e.args[0]!r}"
        ) from e
