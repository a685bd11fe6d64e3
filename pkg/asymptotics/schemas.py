from marshmallow import Schema, fields

from integrand.schemas import SCHEMA_VERSION


class AsymptoticFitSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    a_hat = fields.Float()
    mu_hat = fields.Float()
    mu_theory = fields.Float(allow_none=True)
    rel_err = fields.Float(allow_none=True)
    phase_mu = fields.Float(allow_none=True)
    window = fields.Tuple((fields.Float(), fields.Float()))
    residual = fields.Float()
    samples = fields.Integer()


class MaxRateSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    k = fields.Integer(attribute="params.k")
    l = fields.Integer(attribute="params.l")
    mu_max = fields.Float()
    largest_sampled = fields.Float(dump_only=True)
    dominated = fields.Boolean(dump_only=True)
    sampled_exponents = fields.List(fields.Tuple((fields.Float(), fields.Float())))


class SupersolutionReportSchema(Schema):
    schema = fields.Constant(SCHEMA_VERSION)
    k = fields.Integer()
    max_value = fields.Float(dump_only=True)
    is_supersolution = fields.Boolean(dump_only=True)
    required = fields.Boolean(dump_only=True)
    passed = fields.Boolean(dump_only=True)
    t = fields.List(fields.Float())
    values = fields.List(fields.Float())
