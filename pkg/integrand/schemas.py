"""
Marshmallow schemas for the integrand document and the certification report.
"""

from typing import Any

from marshmallow import (
    RAISE,
    Schema,
    ValidationError,
    fields,
    post_load,
    pre_dump,
    validate,
    validates_schema,
)

from integrand.models import CertificationReport, Integrand

SCHEMA_VERSION = "v1"

VARIANTS = ("power", "glued", "area", "elliptic", "fourier")


class FourierDataSchema(Schema):
    N = fields.Integer(required=True, validate=validate.Range(min=4))
    coeffs = fields.List(fields.Float(), required=True)
    correctors = fields.List(fields.Float(), validate=validate.Length(equal=3))
    max_deviation = fields.Float(allow_none=True)
    profile_deviation = fields.Float(allow_none=True)
    convexity_margin = fields.Float(allow_none=True)
    convexity_check = fields.String()


class IntegrandSchema(Schema):
    """
    JSON document describing an integrand.

    Dumps an Integrand; loads to a plain dictionary that
    integrand.registry.integrand_from_document turns back into an Integrand.
    """

    class Meta:
        unknown = RAISE

    schema = fields.Constant(SCHEMA_VERSION)
    variant = fields.String(required=True, validate=validate.OneOf(VARIANTS))
    k = fields.Integer(required=True, validate=validate.Range(min=1))
    l = fields.Integer(required=True, validate=validate.Range(min=1))
    p = fields.Float(allow_none=True, validate=validate.Range(min=2, min_inclusive=False))
    q = fields.Float(allow_none=True, validate=validate.Range(min=2, min_inclusive=False))
    b_phi = fields.Float(allow_none=True, validate=validate.Range(min=0))
    b_psi = fields.Float(allow_none=True, validate=validate.Range(min=0))
    delta = fields.Float(
        allow_none=True,
        validate=validate.Range(min=0, max=0.25, min_inclusive=False, max_inclusive=False),
    )
    jet_mismatch = fields.Float(allow_none=True)
    fourier = fields.Nested(FourierDataSchema, allow_none=True)

    @pre_dump
    def flatten(self, integrand: Integrand, **kwargs: Any) -> dict[str, Any]:
        fourier = None
        if integrand.fourier is not None:
            data = integrand.fourier
            fourier = {
                "N": data.N,
                "coeffs": list(data.coeffs),
                "correctors": list(data.correctors),
                "max_deviation": data.max_deviation,
                "profile_deviation": data.profile_deviation,
                "convexity_margin": data.convexity_margin,
                "convexity_check": data.convexity_check,
            }
        return {
            "variant": integrand.variant,
            "k": integrand.params.k,
            "l": integrand.params.l,
            "p": integrand.p,
            "q": integrand.q,
            "b_phi": integrand.b_phi,
            "b_psi": integrand.b_psi,
            "delta": integrand.gluing.delta if integrand.gluing else None,
            "jet_mismatch": integrand.jet_mismatch,
            "fourier": fourier,
        }

    @validates_schema
    def validate_variant_fields(self, data: dict[str, Any], **kwargs: Any) -> None:
        variant = data.get("variant")
        if variant in ("power", "glued"):
            missing = [name for name in ("p", "q") if data.get(name) is None]
            if missing:
                raise ValidationError(f"{variant} integrand requires {', '.join(missing)}")
        if variant == "glued" and data.get("delta") is None:
            raise ValidationError("glued integrand requires delta", "delta")
        if variant == "fourier" and not data.get("fourier"):
            raise ValidationError("fourier integrand requires fourier data", "fourier")


class CertificationReportSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    variant = fields.String()
    k = fields.Integer()
    l = fields.Integer()
    one_jet_ok = fields.Boolean(required=True)
    kappa_estimate = fields.Float(required=True)
    second_deriv_margin = fields.Float(required=True)
    convexity_margin = fields.Float(required=True)
    monotonicity_margin = fields.Float(required=True)
    p_inequalities_ok = fields.Boolean(allow_none=True)
    sample_count = fields.Integer(required=True)
    verdict = fields.Boolean(required=True)
    e_at_one = fields.Float()
    phi_trapping_margin = fields.Float(allow_none=True)
    details = fields.Dict(keys=fields.String())

    @post_load
    def make_report(self, data: dict[str, Any], **kwargs: Any) -> CertificationReport:
        data.pop("schema", None)
        return CertificationReport(**data)
