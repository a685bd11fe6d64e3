import numpy as np
import pytest

from foliation.models import CalibrationGrid, LeafDomainError, LeafSide
from foliation.services import (
    calibration_field,
    dilate_leaf,
    divergence_check,
    foliation_check,
    leaf_scales,
    leaf_through_point,
    normal_at,
    reduced_divergence,
    support_check,
    unit_leaf,
)
from integrand.models import AreaProfile, ConeParams, InvalidParameterError
from integrand.services import elliptic_integrand, phi_full
from ode.models import ProfileTable
from tests.factories import IntegrandFactory


@pytest.fixture
def hyperbola():
    """sigma(t) = sqrt(1 + t^2), a convex curve above the cone with sigma' in [0, 1)."""
    t = np.linspace(0, 50, 5001)
    root = np.sqrt(1 + t**2)
    return ProfileTable(t=t, sigma=root, dsigma=t / root, d2sigma=root**-3)


class TestLeafThroughPoint:
    def test_point_on_unit_leaf(self, hyperbola):
        leaf = unit_leaf(hyperbola)
        assert leaf_through_point(leaf, (0.7, np.sqrt(1.49))) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("scale", [0.2, 1.0, 3.5])
    def test_dilated_point(self, hyperbola, scale):
        leaf = unit_leaf(hyperbola)
        point = (scale * 2.0, scale * np.sqrt(5.0))

        found = leaf_through_point(leaf, point)

        assert found == pytest.approx(scale, rel=1e-11)
        residual = abs(found * np.sqrt(1 + (point[0] / found) ** 2) - point[1])
        assert residual <= 1e-12 * point[1]

    def test_axis_point(self, hyperbola):
        assert leaf_through_point(unit_leaf(hyperbola), (0.0, 2.5)) == 2.5

    def test_x_side_exchanges_coordinates(self, hyperbola):
        leaf = unit_leaf(hyperbola, LeafSide.X_SIDE)
        assert leaf_through_point(leaf, (np.sqrt(5.0), 2.0)) == pytest.approx(1.0, rel=1e-11)

    @pytest.mark.parametrize("point", [(1.0, 1.0), (2.0, 1.0), (-0.1, 1.0)])
    def test_rejects_points_off_the_side(self, hyperbola, point):
        with pytest.raises(LeafDomainError):
            leaf_through_point(unit_leaf(hyperbola), point)

    def test_rejects_points_beyond_the_table(self, hyperbola):
        """sigma(50)/50 = 1.0002, so a point with v/u = 1.0001 needs t > 50."""
        with pytest.raises(LeafDomainError, match="too close to the cone"):
            leaf_through_point(unit_leaf(hyperbola), (1.0, 1.0001))

    def test_vector_form_matches_scalar(self, hyperbola):
        leaf = unit_leaf(hyperbola)
        u = np.array([0.0, 0.3, 1.0, 2.0])
        v = np.array([0.5, 1.1, 1.6, 2.5])

        scales = leaf_scales(leaf, u, v)

        expected = [leaf_through_point(leaf, point) for point in zip(u, v, strict=True)]
        assert np.allclose(scales, expected, rtol=1e-13, atol=0)


class TestLeafGeometry:
    def test_dilation(self, hyperbola):
        leaf = dilate_leaf(unit_leaf(hyperbola), 2.0)
        assert leaf.scale == 2.0
        assert leaf.height(2.0) == pytest.approx(2.0 * np.sqrt(2.0))

    @pytest.mark.parametrize("factor", [0.0, -1.0])
    def test_dilation_rejects_nonpositive(self, hyperbola, factor):
        with pytest.raises(InvalidParameterError):
            dilate_leaf(unit_leaf(hyperbola), factor)

    def test_normal_is_unit_and_orthogonal(self, hyperbola):
        leaf = unit_leaf(hyperbola)
        t = np.array([0.0, 0.5, 4.0])

        normal_u, normal_v = normal_at(leaf, t)

        assert np.allclose(np.hypot(normal_u, normal_v), 1.0)
        assert np.allclose(normal_u + normal_v * hyperbola.evaluate(t, 1), 0.0)
        assert np.all(normal_v > 0)

    def test_normal_on_x_side(self, hyperbola):
        normal_u, normal_v = normal_at(unit_leaf(hyperbola, LeafSide.X_SIDE), 0.0)
        assert (normal_u, normal_v) == (1.0, 0.0)


class TestCalibrationField:
    def test_area_field_is_the_normal(self, hyperbola):
        """For the Euclidean norm grad F(nu) = nu."""
        integrand = elliptic_integrand(ConeParams(1, 1))
        leaf = unit_leaf(hyperbola)

        field = calibration_field(integrand, leaf, (0.75, 1.25))

        normal = normal_at(leaf, 0.75)
        assert np.allclose(np.array(field) / np.hypot(*field), normal)

    def test_matches_scalar_gradient(self, hyperbola):
        integrand = IntegrandFactory()
        leaf = unit_leaf(hyperbola)
        normal = normal_at(leaf, 0.75)

        field = calibration_field(integrand, leaf, (0.75, 1.25))

        _, gradient = phi_full(integrand, *normal)
        assert np.allclose(field, gradient, rtol=1e-14)

    def test_any_dilation_gives_the_same_field(self, hyperbola):
        integrand = IntegrandFactory()
        leaf = unit_leaf(hyperbola)
        dilated = dilate_leaf(leaf, 2.5)

        assert calibration_field(integrand, dilated, (1.2, 2.1)) == calibration_field(
            integrand, leaf, (1.2, 2.1)
        )

    def test_dilated_leaf_normal(self, hyperbola):
        """On the leaf of scale 2.5 the field is grad F of that leaf's own normal."""
        integrand = IntegrandFactory()
        dilated = dilate_leaf(unit_leaf(hyperbola), 2.5)
        normal = normal_at(dilated, 1.875)

        field = calibration_field(integrand, dilated, (1.875, 3.125))

        assert normal == pytest.approx(normal_at(unit_leaf(hyperbola), 0.75), rel=1e-14)
        _, gradient = phi_full(integrand, *normal)
        assert np.allclose(field, gradient, rtol=1e-12)


class TestReducedDivergence:
    def test_constant_field_negative_control(self):
        params = ConeParams(2, 3)
        u, v = np.meshgrid([0.2, 0.5], [1.0, 2.0])

        def constant(a, b):
            return np.zeros_like(a), np.full_like(b, 0.8)

        divergence = reduced_divergence(constant, params, u, v, 1e-3)

        assert np.allclose(divergence, 3 * 0.8 / v)

    def test_position_field(self):
        """The position vector has divergence k + l + 2."""
        params = ConeParams(2, 3)
        u, v = np.meshgrid([0.2, 0.5], [1.0, 2.0])

        divergence = reduced_divergence(lambda a, b: (a, b), params, u, v, 1e-2)

        assert np.allclose(divergence, 7.0)


class TestSupportCheck:
    def test_power_integrand_has_no_violations(self):
        angles = np.linspace(0.05, np.pi / 2 - 0.05, 25)
        violations = support_check(IntegrandFactory(), np.cos(angles), np.sin(angles))
        assert violations == 0


class TestGridValidation:
    def test_grid_touching_the_cone(self, hyperbola):
        grid = CalibrationGrid(0.2, 1.0, 1.0, 2.0, 1e-3)
        with pytest.raises(LeafDomainError, match="away from the cone"):
            divergence_check(IntegrandFactory(), unit_leaf(hyperbola), grid)

    def test_grid_near_the_axis(self, hyperbola):
        grid = CalibrationGrid(0.001, 0.5, 1.0, 2.0, 1e-3)
        with pytest.raises(LeafDomainError):
            divergence_check(IntegrandFactory(), unit_leaf(hyperbola), grid)


@pytest.mark.slow
class TestCalibrationOnComputedLeaf:
    def test_divergence_is_discretization_error(self, power_leaf):
        table, _ = power_leaf
        grid = CalibrationGrid.parse("0.2,0.8,1.2,2.0,1e-3")

        report = divergence_check(IntegrandFactory(), unit_leaf(table), grid)

        assert report.spacings == [1e-3, 5e-4, 2.5e-4]
        assert report.max_abs_divergence[2] < 1e-5
        assert all(3.0 < ratio < 5.0 for ratio in report.refinement_ratios)
        assert 1.6 < report.convergence_order < 2.4
        assert report.euler_identity_max_error < 1e-12
        assert report.support_inequality_violations == 0
        assert report.passed

    def test_x_side(self, power_leaf):
        """For k = l the x side uses the same leaf with coordinates exchanged."""
        table, _ = power_leaf
        grid = CalibrationGrid(1.2, 2.0, 0.2, 0.8, 1e-3)

        report = divergence_check(IntegrandFactory(), unit_leaf(table, LeafSide.X_SIDE), grid)

        assert report.side == "x_side"
        assert report.max_abs_divergence[2] < 1e-5
        assert report.support_inequality_violations == 0

    def test_area_leaf_is_calibrated(self, area_leaf):
        table, _ = area_leaf
        integrand = elliptic_integrand(ConeParams(3, 3))
        grid = CalibrationGrid(0.2, 0.8, 1.2, 2.0, 1e-3)

        report = divergence_check(integrand, unit_leaf(table), grid)

        assert report.max_abs_divergence[2] < 1e-5
        assert report.max_abs_divergence[0] > report.max_abs_divergence[2]


@pytest.mark.slow
class TestFoliationCheck:
    def test_power_leaf_foliates(self, power_leaf, power_phi, params):
        table, _ = power_leaf

        report = foliation_check(unit_leaf(table), power_phi, params, samples=1000, seed=7)

        assert report.passed
        assert report.max_relative_residual <= 1e-12
        assert report.first_variation_residual <= 1e-6
        assert report.min_excess > 0

    def test_area_leaf_foliates(self, area_leaf):
        table, _ = area_leaf

        report = foliation_check(
            unit_leaf(table), AreaProfile(), ConeParams(3, 3), samples=200
        )

        assert report.passed
