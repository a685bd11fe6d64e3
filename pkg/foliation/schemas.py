from typing import Any

from marshmallow import RAISE, Schema, ValidationError, fields, post_load, validates_schema

from integrand.schemas import SCHEMA_VERSION

from .models import CalibrationGrid


class CalibrationGridSchema(Schema):
    class Meta:
        unknown = RAISE

    u_min = fields.Float(required=True)
    u_max = fields.Float(required=True)
    v_min = fields.Float(required=True)
    v_max = fields.Float(required=True)
    h = fields.Float(required=True)
    points = fields.Integer(load_default=41)

    @validates_schema
    def validate_bounds(self, data: dict[str, Any], **kwargs: Any) -> None:
        if data["u_min"] >= data["u_max"] or data["v_min"] >= data["v_max"]:
            raise ValidationError("grid bounds must satisfy min < max")
        if data["h"] <= 0:
            raise ValidationError("h must be positive", "h")

    @post_load
    def make_grid(self, data: dict[str, Any], **kwargs: Any) -> CalibrationGrid:
        return CalibrationGrid(**data)


class CalibrationReportSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    grid = fields.Nested(CalibrationGridSchema)
    side = fields.String()
    spacings = fields.List(fields.Float())
    max_abs_divergence = fields.List(fields.Float())
    refinement_ratios = fields.List(fields.Float())
    convergence_order = fields.Float()
    euler_identity_max_error = fields.Float()
    support_inequality_violations = fields.Integer()
    support_samples = fields.Integer()
    details = fields.Dict()
    extrapolated_limit = fields.Float(dump_only=True)
    passed = fields.Boolean(dump_only=True)


class FoliationReportSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    side = fields.String()
    samples = fields.Integer()
    max_relative_residual = fields.Float()
    monotonicity_violations = fields.Integer()
    disjointness_violations = fields.Integer()
    max_derivative_mismatch = fields.Float()
    min_excess = fields.Float()
    excess_decreasing = fields.Boolean()
    first_variation_residual = fields.Float()
    passed = fields.Boolean(dump_only=True)


class PerturbationTrialSchema(Schema):
    center = fields.Float()
    width = fields.Float()
    sign = fields.Integer()
    epsilons = fields.List(fields.Float())
    delta_energy = fields.List(fields.Float())
    fitted_c = fields.Float()
    fit_residual = fields.Float()


class PerturbationReportSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    interval = fields.Tuple((fields.Float(), fields.Float()))
    eps = fields.Float()
    q_tol = fields.Float()
    redrawn = fields.Integer()
    min_delta_energy = fields.Float(dump_only=True)
    min_fitted_c = fields.Float(dump_only=True)
    passed = fields.Boolean(dump_only=True)
    trials = fields.List(fields.Nested(PerturbationTrialSchema))
