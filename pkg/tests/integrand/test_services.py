import math

import numpy as np
import pytest

from integrand.models import (
    AreaProfile,
    ConeParams,
    GluingParams,
    IncompatibleIntegrandError,
    InvalidParameterError,
    OutOfRangeError,
    ProfileSide,
)
from integrand.services import (
    admissible_pair,
    build_integrand,
    certify_profile,
    compat_q,
    diagonal_jet_mismatch,
    e_kl,
    elliptic_integrand,
    glue_profiles,
    legendre_slope,
    matched_b_psi,
    phi_full,
    phi_full_array,
    phi_gradient,
    phi_value,
    power_profile,
    power_trapping_margins,
    profile_eval,
    reflect_profile,
)
from tests.factories import (
    ConeParamsFactory,
    IntegrandFactory,
    PowerProfileFactory,
    RawPowerProfileFactory,
)


class TestPowerProfile:
    def test_raw_coefficients(self):
        """b = 0 recovers the closed-form coefficients 11/12 and 1/12."""
        profile = RawPowerProfileFactory()
        assert profile.a == pytest.approx(11 / 12)
        assert profile.c == pytest.approx(1 / 12)
        assert profile.evaluate(1.0, 2) == pytest.approx(2.5)

    def test_regularized_coefficients(self):
        """b = 0.01 gives a = 0.91, c = 0.08 and phi''(1) = 2.42."""
        profile = PowerProfileFactory()
        assert profile.a == pytest.approx(0.91)
        assert profile.c == pytest.approx(0.08)
        assert profile.evaluate(1.0, 2) == pytest.approx(2.42)

    def test_one_jet_on_both_sides(self):
        """Value 1 and the side slope at s = 1."""
        params = ConeParams(k=1, l=2)
        phi = power_profile(params, ProfileSide.PHI, 6, 0.01)
        psi = power_profile(params, "psi", 11, 0.01)
        assert phi.evaluate(1.0) == pytest.approx(1.0, abs=1e-14)
        assert phi.evaluate(1.0, 1) == pytest.approx(2 / 3, abs=1e-14)
        assert psi.evaluate(1.0, 1) == pytest.approx(1 / 3, abs=1e-14)

    def test_uniformly_convex(self):
        """phi'' >= 2b everywhere on [-1, 1]."""
        profile = PowerProfileFactory()
        s = np.linspace(-1, 1, 401)
        assert np.all(profile.evaluate(s, 2) >= 2 * profile.b - 1e-15)

    def test_rejects_small_exponent(self):
        """Exponents p <= 2 are rejected."""
        with pytest.raises(InvalidParameterError) as exc_info:
            PowerProfileFactory(p=2.0)

        assert "exceed 2" in str(exc_info.value)

    def test_rejects_large_b(self):
        """b large enough to make c nonpositive is rejected."""
        with pytest.raises(InvalidParameterError):
            PowerProfileFactory(b=0.3)

    def test_large_b_constructs_but_fails_certification(self):
        """b = 0.1 violates the second-derivative threshold."""
        profile = PowerProfileFactory(b=0.1)
        assert profile.evaluate(1.0, 2) == pytest.approx(1.7)

        report = certify_profile(profile, ConeParamsFactory())

        assert report.second_deriv_margin == pytest.approx(-0.3)
        assert report.verdict is False


class TestProfileEval:
    def test_area_curvature_at_one(self):
        """Area profile phi''(1) = 2^(-3/2)."""
        assert profile_eval(AreaProfile(), 1.0, 2) == pytest.approx(0.353553, abs=1e-6)

    def test_power_slope_at_zero(self):
        """Even profiles have zero slope at the origin."""
        assert profile_eval(PowerProfileFactory(), 0.0, 1) == 0.0

    def test_power_value_at_one(self):
        """Power profiles take the value 1 at s = 1."""
        assert profile_eval(PowerProfileFactory(), 1.0, 0) == pytest.approx(1.0)


class TestReflectProfile:
    def test_area_profile_is_self_reflected(self):
        """s sqrt(1 + 1/s^2) = sqrt(1 + s^2)."""
        reflected = reflect_profile(AreaProfile())
        s = np.linspace(0.2, 2.0, 50)
        for order in range(4):
            assert np.allclose(
                reflected.evaluate(s, order), AreaProfile().evaluate(s, order)
            )

    def test_raw_power_reflection(self):
        """Reflection of the raw q = 6 profile is 11 s/12 + s^-5/12."""
        psi = power_profile(ConeParams(1, 1), ProfileSide.PSI, 6, 0.0)
        reflected = reflect_profile(psi)
        s = np.linspace(0.3, 1.0, 15)
        assert np.allclose(reflected.evaluate(s), 11 * s / 12 + s**-5 / 12)

    def test_involution(self):
        """Reflecting twice returns the original profile on [1/2, 1]."""
        psi = power_profile(ConeParams(1, 2), ProfileSide.PSI, 11, 0.01)
        twice = reflect_profile(reflect_profile(psi))
        s = np.linspace(0.5, 1.0, 51)
        for order in range(4):
            assert np.max(np.abs(twice.evaluate(s, order) - psi.evaluate(s, order))) < 1e-12

    def test_compatible_pair_agrees_to_second_order(self):
        """Compatible exponents make phi and reflect(psi) agree to second order."""
        params = ConeParams(k=1, l=2)
        phi = power_profile(params, ProfileSide.PHI, 6, 0.0)
        psi = power_profile(params, ProfileSide.PSI, 11, 0.0)
        assert diagonal_jet_mismatch(phi, psi) < 1e-12


class TestGlueProfiles:
    def test_gluing_identical_profiles(self):
        """Gluing a profile with itself returns the profile."""
        phi = PowerProfileFactory()
        glued = glue_profiles(phi, phi, GluingParams(delta=0.1))
        s = np.linspace(0, 1.1, 111)
        for order in range(4):
            assert np.allclose(glued.evaluate(s, order), phi.evaluate(s, order))

    def test_equals_phi_below_transition(self):
        """Below 1 - 2 delta the glued profile is phi exactly."""
        params = ConeParams(k=1, l=2)
        phi = power_profile(params, ProfileSide.PHI, 6, 0.0)
        phi_tilde = reflect_profile(power_profile(params, ProfileSide.PSI, 11, 0.0))
        glued = glue_profiles(phi, phi_tilde, GluingParams(delta=0.05))
        assert glued.evaluate(0.5) == phi.evaluate(0.5)

    def test_equals_reflection_near_one(self):
        """Above 1 - delta the glued profile is the reflected profile."""
        params = ConeParams(k=1, l=2)
        phi = power_profile(params, ProfileSide.PHI, 6, 0.0)
        phi_tilde = reflect_profile(power_profile(params, ProfileSide.PSI, 11, 0.0))
        glued = glue_profiles(phi, phi_tilde, GluingParams(delta=0.05))
        s = np.linspace(0.96, 1.0, 9)
        for order in range(3):
            assert np.allclose(glued.evaluate(s, order), phi_tilde.evaluate(s, order))

    def test_deviation_shrinks_quadratically(self):
        """Halving delta reduces the trapping-quantity deviation about fourfold."""
        params = ConeParams(k=1, l=2)
        phi = power_profile(params, ProfileSide.PHI, 6, 0.0)
        phi_tilde = reflect_profile(power_profile(params, ProfileSide.PSI, 11, 0.0))

        coarse = glue_profiles(phi, phi_tilde, GluingParams(delta=0.05), params)
        fine = glue_profiles(phi, phi_tilde, GluingParams(delta=0.025), params)

        assert coarse.e_deviation is not None and fine.e_deviation is not None
        ratio = coarse.e_deviation / fine.e_deviation
        assert 3.0 < ratio < 5.5

    def test_rejects_jet_mismatch(self):
        """Profiles disagreeing at s = 1 cannot be glued."""
        params = ConeParams(k=1, l=2)
        phi = power_profile(params, ProfileSide.PHI, 6, 0.0)
        phi_tilde = reflect_profile(power_profile(params, ProfileSide.PSI, 7, 0.0))
        with pytest.raises(IncompatibleIntegrandError) as exc_info:
            glue_profiles(phi, phi_tilde, GluingParams(delta=0.05))

        assert "second order" in str(exc_info.value)


class TestEkl:
    def test_value_at_zero(self):
        """E(0) = a/3 - 1.5 * 2b for k = l = 1."""
        value = e_kl(PowerProfileFactory(), ConeParamsFactory(), 0.0)
        assert value == pytest.approx(0.273333333333, abs=1e-10)

    def test_vanishes_at_one_under_one_jet(self):
        """The one-jet forces E(1) = 0."""
        for k, l in [(1, 1), (1, 2), (3, 2)]:
            params = ConeParams(k, l)
            profile = power_profile(params, ProfileSide.PHI, 6, 0.01)
            assert abs(e_kl(profile, params, 1.0)) < 1e-9

    def test_area_profile_fails_one_jet(self):
        """The raw area profile is not normalized at s = 1."""
        report = certify_profile(AreaProfile(), ConeParams(1, 1))
        assert report.one_jet_ok is False
        assert report.verdict is False

    def test_value_at_one_is_scale_invariant(self):
        """E(1) only sees phi'(1)/phi(1); for the area profile with k = l it is 0."""
        params = ConeParams(1, 1)
        assert abs(e_kl(AreaProfile(), params, 1.0)) < 1e-12
        assert abs(e_kl(AreaProfile(), ConeParams(1, 2), 1.0)) > 1e-3

    def test_vectorized(self):
        """Arrays of abscissae are evaluated elementwise."""
        profile = PowerProfileFactory()
        params = ConeParamsFactory()
        s = np.array([0.0, 0.5, 1.0])
        values = e_kl(profile, params, s)
        assert values.shape == (3,)
        assert values[1] == pytest.approx(e_kl(profile, params, 0.5))

    def test_raw_power_polynomial_form(self):
        """E = r s^(p-2) (R - L) for the raw power profile."""
        params = ConeParams(k=1, l=2)
        p = 6.0
        profile = power_profile(params, ProfileSide.PHI, p, 0.0)
        s = np.linspace(0.1, 0.9, 17)
        n, r = params.n, params.l / params.n
        left = ((p - 1) * ((n + 1) / 2 - s) + params.k * s) * (1 - s)
        right = (n - 1) * (n - params.l / p) / (n + 1) * (s ** (2 - p) - s**2)
        assert np.allclose(e_kl(profile, params, s), r * s ** (p - 2) * (right - left))


class TestCertifyProfile:
    def test_regularized_profile_passes(self):
        """k = l = 1, p = 6, b = 0.01 is certified."""
        report = certify_profile(PowerProfileFactory(), ConeParamsFactory())

        assert report.one_jet_ok is True
        assert report.second_deriv_margin == pytest.approx(0.42)
        assert report.kappa_estimate > 0
        assert report.p_inequalities_ok is True
        assert report.verdict is True
        assert report.sample_count == 10001

    def test_kappa_holds_on_finer_grid(self):
        """E >= 0.9 kappa (1 - s) on a grid ten times finer."""
        profile = PowerProfileFactory()
        params = ConeParamsFactory()
        report = certify_profile(profile, params)

        s = np.linspace(0, 1, 100001)
        margin = e_kl(profile, params, s) - 0.9 * report.kappa_estimate * (1 - s)
        assert np.min(margin) >= -1e-12

    def test_e_at_one_vanishes(self):
        """Certified profiles report E(1) = 0."""
        report = certify_profile(PowerProfileFactory(), ConeParamsFactory())
        assert abs(report.e_at_one) < 1e-9

    def test_boundary_exponent_fails_first_order(self):
        """p = 5 is the excluded boundary case for k = l = 1."""
        report = certify_profile(RawPowerProfileFactory(p=5.0), ConeParamsFactory())

        assert report.p_inequalities_ok is False
        assert report.details["first_order_ok"] is False
        assert report.verdict is False

    def test_raw_profile_second_order_passes(self):
        """25 - 22.5 + 2 >= 0 at p = 6, but the raw profile is not uniformly convex."""
        report = certify_profile(RawPowerProfileFactory(), ConeParamsFactory())

        assert report.details["second_order_ok"] is True
        assert report.p_inequalities_ok is True
        assert report.convexity_margin == pytest.approx(0.0, abs=1e-15)
        assert report.phi_trapping_margin is not None
        assert report.phi_trapping_margin > 0
        assert report.verdict is False

    def test_monotonicity_margin(self):
        """phi - s phi' is minimized at s = 1 for power profiles."""
        params = ConeParamsFactory()
        report = certify_profile(PowerProfileFactory(), params)
        assert report.monotonicity_margin == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_admissible_pairs_certify_on_both_sides(self, k, l):
        """Both sides of every admissible pair are certified with b = 0.01."""
        params = ConeParams(k, l)
        p, q = admissible_pair(params)
        integrand = build_integrand(params, p, q, b_phi=0.01)

        phi_report = certify_profile(integrand.phi, params, samples=2001)
        psi_report = certify_profile(integrand.psi, params.swapped(), samples=2001)

        assert phi_report.verdict is True
        assert psi_report.verdict is True

    def test_unevaluable_profile_is_reported(self):
        """A reflected profile cannot be evaluated at 0; the report says so."""
        report = certify_profile(reflect_profile(AreaProfile()), ConeParamsFactory())

        assert report.verdict is False
        assert "singular" in report.details["error"]


class TestPowerTrappingMargins:
    def test_regular_case_has_positive_margins(self):
        """k = l = 1, p = 6 satisfies the polynomial inequality."""
        margins = power_trapping_margins(ConeParams(1, 1), 6.0)
        assert margins["interior_margin"] > 0
        assert margins["first_order_margin"] > 0


class TestCompatQ:
    def test_unequal_dimensions(self):
        """(k, l, p) = (1, 2, 6) gives q = 11."""
        assert compat_q(ConeParams(1, 2), 6) == pytest.approx(11)

    def test_symmetric_case(self):
        """k = l gives q = p."""
        assert compat_q(ConeParams(3, 3), 7.5) == pytest.approx(7.5)

    def test_non_integer_q(self):
        """(k, l, p) = (2, 1, 6) gives q = 3.5."""
        assert compat_q(ConeParams(2, 1), 6) == pytest.approx(3.5)

    def test_rejects_small_q(self):
        """A compatible q <= 2 is rejected."""
        with pytest.raises(InvalidParameterError):
            compat_q(ConeParams(3, 1), 2.5)

    def test_admissible_pair_raises_p(self):
        """p is raised through even values until q >= 6."""
        assert admissible_pair(ConeParams(3, 1)) == (16, pytest.approx(6.0))
        assert admissible_pair(ConeParams(1, 2)) == (6.0, pytest.approx(11.0))

    def test_matched_b_psi(self):
        """Matched regularization equalizes phi''(1) and psi''(1)."""
        params = ConeParams(1, 2)
        b_psi = matched_b_psi(6, 11, 0.01)
        phi = power_profile(params, ProfileSide.PHI, 6, 0.01)
        psi = power_profile(params, ProfileSide.PSI, 11, b_psi)
        assert b_psi == pytest.approx(0.04 / 9)
        assert diagonal_jet_mismatch(phi, psi) < 1e-12


class TestLegendreSlope:
    def test_area_profile(self):
        """s / sqrt(1 + s^2) = 0.6 at s = 0.75."""
        assert legendre_slope(AreaProfile(), 0.6) == pytest.approx(0.75, abs=1e-12)

    def test_zero_slope(self):
        """Zero slope maps to the origin."""
        assert legendre_slope(PowerProfileFactory(), 0.0) == 0.0

    def test_one_jet_slope(self):
        """phi'(1) = 1/2 for k = l = 1."""
        assert legendre_slope(PowerProfileFactory(), 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_negative_slope(self):
        """Odd symmetry of phi'."""
        assert legendre_slope(AreaProfile(), -0.6) == pytest.approx(-0.75, abs=1e-12)

    def test_residual_is_small(self):
        """|phi'(s) - xi| <= 1e-12 at the returned point."""
        profile = PowerProfileFactory()
        for xi in (1e-6, 0.013, 0.2, 0.49):
            s = legendre_slope(profile, xi)
            assert abs(profile.evaluate(s, 1) - xi) <= 1e-12

    def test_out_of_range(self):
        """Slopes beyond phi'(1.25) are rejected."""
        with pytest.raises(OutOfRangeError):
            legendre_slope(AreaProfile(), 0.99)


class TestBuildIntegrand:
    def test_compatible_raw_pair(self):
        """(1, 2, 6, 11) with b = 0 matches to second order."""
        integrand = build_integrand(ConeParams(1, 2), 6, 11, b_phi=0.0, b_psi=0.0)
        assert integrand.jet_mismatch <= 1e-8
        assert integrand.variant == "power"

    def test_symmetric_integrand(self):
        """k = l and p = q give identical sides."""
        integrand = build_integrand(ConeParams(1, 1), 6, 6, b_phi=0.01, b_psi=0.01)
        phi, psi = integrand.phi, integrand.psi
        assert (phi.a, phi.b, phi.c, phi.p) == (psi.a, psi.b, psi.c, psi.p)
        s = np.linspace(0, 1, 11)
        assert np.allclose(integrand.phi.evaluate(s), integrand.psi.evaluate(s))

    def test_incompatible_exponents(self):
        """(1, 2, 6, 7) without gluing is rejected."""
        with pytest.raises(IncompatibleIntegrandError) as exc_info:
            build_integrand(ConeParams(1, 2), 6, 7, b_phi=0.0, b_psi=0.0)

        assert "diagonal jets" in str(exc_info.value)

    def test_incompatible_exponents_with_gluing(self):
        """Gluing also requires second-order agreement."""
        with pytest.raises(IncompatibleIntegrandError):
            build_integrand(
                ConeParams(1, 2), 6, 7, b_phi=0.0, b_psi=0.0, gluing=GluingParams(0.05)
            )

    def test_default_b_psi_is_matched(self):
        """Without b_psi the matched regularization is used."""
        integrand = IntegrandFactory(params=ConeParams(1, 2))
        assert integrand.b_psi == pytest.approx(0.04 / 9)
        assert integrand.jet_mismatch < 1e-12

    def test_glued_integrand(self):
        """The glued integrand is the reflected psi near the diagonal."""
        params = ConeParams(1, 2)
        integrand = build_integrand(
            params, 6, 11, b_phi=0.0, gluing=GluingParams(delta=0.05)
        )
        assert integrand.variant == "glued"
        assert integrand.jet_mismatch < 1e-12
        assert integrand.phi.evaluate(0.97) == pytest.approx(
            reflect_profile(integrand.psi).evaluate(0.97), abs=1e-14
        )


class TestPhiFull:
    def test_axes(self):
        """F(0, 1) = phi(0) and F(1, 0) = psi(0)."""
        integrand = IntegrandFactory(params=ConeParams(1, 2))
        assert phi_full(integrand, 0, 1)[0] == pytest.approx(integrand.phi.evaluate(0.0))
        assert phi_full(integrand, 1, 0)[0] == pytest.approx(integrand.psi.evaluate(0.0))

    def test_diagonal(self):
        """F(1, 1) = 1."""
        value, _ = phi_full(IntegrandFactory(), 1, 1)
        assert value == pytest.approx(1.0)

    def test_euler_identity(self):
        """u F_u + v F_v = F at sampled points."""
        integrand = IntegrandFactory(params=ConeParams(1, 2))
        for u, v in [(0.3, 1.0), (1.0, 0.2), (2.0, 2.5), (0.7, 0.1)]:
            value, (grad_u, grad_v) = phi_full(integrand, u, v)
            assert abs(u * grad_u + v * grad_v - value) < 1e-12

    def test_homogeneity(self):
        """F(lambda u, lambda v) = lambda F(u, v)."""
        integrand = IntegrandFactory(params=ConeParams(2, 1))
        value, _ = phi_full(integrand, 0.4, 0.9)
        scaled, _ = phi_full(integrand, 1.2, 2.7)
        assert scaled == pytest.approx(3 * value)

    def test_rejects_origin(self):
        """The origin is not in the domain."""
        with pytest.raises(InvalidParameterError):
            phi_full(IntegrandFactory(), 0, 0)

    def test_gradient_second_order_accuracy(self):
        """Centered differences converge at second order to the gradient."""
        integrand = IntegrandFactory(params=ConeParams(1, 2))
        u, v = 0.6, 0.9
        _, (grad_u, _) = phi_full(integrand, u, v)

        def error(h):
            forward = phi_full(integrand, u + h, v)[0]
            backward = phi_full(integrand, u - h, v)[0]
            return abs((forward - backward) / (2 * h) - grad_u)

        assert error(1e-3) / error(1e-4) > 50

    def test_elliptic_integrand_is_quadratic_form_root(self):
        """The normalized elliptic integrand is sqrt((l u^2 + k v^2)/(k+l))."""
        integrand = elliptic_integrand(ConeParams(2, 4))
        for u, v in [(0.3, 1.0), (1.0, 0.2)]:
            value, _ = phi_full(integrand, u, v)
            assert value == pytest.approx(math.sqrt((4 * u**2 + 2 * v**2) / 6))

    def test_array_form_matches_scalar(self):
        """The vector form agrees with phi_full and phi_gradient on signed points."""
        integrand = IntegrandFactory(params=ConeParams(1, 2))
        a = np.array([0.3, -1.0, 2.0, 0.0, -0.7])
        b = np.array([1.0, 0.2, -2.5, 1.0, -0.1])

        values, grad_a, grad_b = phi_full_array(integrand, a, b)

        for index in range(len(a)):
            assert values[index] == pytest.approx(phi_value(integrand, a[index], b[index]))
            expected = phi_gradient(integrand, a[index], b[index])
            assert (grad_a[index], grad_b[index]) == pytest.approx(expected)
