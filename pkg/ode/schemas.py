from typing import Any

from marshmallow import RAISE, Schema, fields, post_load, validate

from integrand.schemas import SCHEMA_VERSION

from .models import LinearizationData, SolverOptions

POSITIVE = validate.Range(min=0, min_inclusive=False)


class SolverOptionsSchema(Schema):
    """Solver tolerances as read from flags or a key=value file."""

    class Meta:
        unknown = RAISE

    t_switch = fields.Float(validate=validate.Range(min=0, max=1e-2, min_inclusive=False))
    rk_tol = fields.Float(validate=POSITIVE)
    converge_tol = fields.Float(validate=POSITIVE)
    region_tol = fields.Float(validate=POSITIVE)
    tau_max = fields.Float(validate=POSITIVE)

    @post_load
    def make_options(self, data: dict[str, Any], **kwargs: Any) -> SolverOptions:
        return SolverOptions(**data)


class LinearizationSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    M = fields.List(fields.List(fields.Float()))
    lambda_plus = fields.Float()
    lambda_minus = fields.Float()
    mu = fields.Float()
    slopes = fields.List(fields.Float())
    numeric_eigenvalues = fields.List(fields.Float())
    eigenvalue_error = fields.Float()
    slope_error = fields.Float()

    @post_load
    def make_linearization(self, data: dict[str, Any], **kwargs: Any) -> LinearizationData:
        data.pop("schema", None)
        return LinearizationData(
            M=(tuple(data["M"][0]), tuple(data["M"][1])),
            lambda_plus=data["lambda_plus"],
            lambda_minus=data["lambda_minus"],
            mu=data["mu"],
            slopes=tuple(data["slopes"]),
            numeric_eigenvalues=tuple(data["numeric_eigenvalues"]),
            eigenvalue_error=data["eigenvalue_error"],
            slope_error=data["slope_error"],
        )
