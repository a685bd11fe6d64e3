import numpy as np
import pytest

from foliation.energy import perturbation_test, reduced_energy
from foliation.models import LeafDomainError
from integrand.models import AreaProfile, ConeParams, InvalidParameterError
from ode.models import ProfileTable


@pytest.fixture
def cone_table():
    t = np.linspace(0, 3, 31)
    return ProfileTable(t=t, sigma=t.copy(), dsigma=np.ones_like(t), d2sigma=np.zeros_like(t))


@pytest.fixture
def parabola_table():
    """sigma = 1 + t^2/2 is not a leaf: its energy decreases along some bump."""
    t = np.linspace(0, 1.8, 1801)
    return ProfileTable(t=t, sigma=1 + t**2 / 2, dsigma=t.copy(), d2sigma=np.ones_like(t))


class TestReducedEnergy:
    def test_cone_with_area_profile(self, cone_table):
        """Integral of t * t * sqrt(2) over [1, 2]."""
        energy = reduced_energy(AreaProfile(), ConeParams(1, 1), cone_table, (1.0, 2.0))
        assert energy == pytest.approx(7 * np.sqrt(2) / 3, rel=1e-12)

    def test_additivity(self, cone_table):
        profile, params = AreaProfile(), ConeParams(1, 1)

        left = reduced_energy(profile, params, cone_table, (0.5, 1.3))
        right = reduced_energy(profile, params, cone_table, (1.3, 2.7))
        whole = reduced_energy(profile, params, cone_table, (0.5, 2.7))

        assert abs(left + right - whole) <= 1e-12 * whole

    def test_empty_interval(self, cone_table):
        assert reduced_energy(AreaProfile(), ConeParams(1, 1), cone_table, (1.5, 1.5)) == 0.0

    def test_interval_outside_table(self, cone_table):
        with pytest.raises(LeafDomainError):
            reduced_energy(AreaProfile(), ConeParams(1, 1), cone_table, (1.0, 4.0))

    def test_reversed_interval(self, cone_table):
        with pytest.raises(InvalidParameterError):
            reduced_energy(AreaProfile(), ConeParams(1, 1), cone_table, (2.0, 1.0))


class TestPerturbationTest:
    def test_rejects_large_eps(self, parabola_table):
        with pytest.raises(InvalidParameterError):
            perturbation_test(
                AreaProfile(), ConeParams(1, 1), parabola_table, (0.1, 0.9), eps=0.05
            )

    def test_rejects_interval_touching_the_table_ends(self, parabola_table):
        with pytest.raises(LeafDomainError):
            perturbation_test(AreaProfile(), ConeParams(1, 1), parabola_table, (0.0, 1.0))

    def test_non_solution_fails(self, parabola_table):
        report = perturbation_test(
            AreaProfile(), ConeParams(1, 1), parabola_table, (0.1, 0.9), trials=5, seed=3
        )

        assert len(report.trials) == 5
        assert report.min_delta_energy < -report.q_tol
        assert not report.passed

    def test_reproducible(self, parabola_table):
        first = perturbation_test(
            AreaProfile(), ConeParams(1, 1), parabola_table, (0.1, 0.9), trials=3, seed=11
        )
        second = perturbation_test(
            AreaProfile(), ConeParams(1, 1), parabola_table, (0.1, 0.9), trials=3, seed=11
        )

        assert [trial.center for trial in first.trials] == [
            trial.center for trial in second.trials
        ]
        assert first.min_delta_energy == second.min_delta_energy


@pytest.mark.slow
class TestPerturbationOfLeaves:
    def test_power_leaf_is_a_local_minimizer(self, power_leaf, power_phi, params):
        table, _ = power_leaf

        report = perturbation_test(power_phi, params, table, (0.5, 3.0), trials=20)

        assert report.passed
        assert report.min_delta_energy >= -1e-10
        assert report.min_fitted_c > 0
        assert max(trial.fit_residual for trial in report.trials) < 0.1
        assert all(trial.epsilons == [1e-2, -1e-2, 5e-3, -5e-3] for trial in report.trials)

    def test_area_leaf(self, area_leaf):
        table, _ = area_leaf

        report = perturbation_test(
            AreaProfile(), ConeParams(3, 3), table, (0.5, 2.0), trials=10, eps=5e-3
        )

        assert report.passed
