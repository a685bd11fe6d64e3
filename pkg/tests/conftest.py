import pytest

from integrand.models import AreaProfile, ConeParams
from ode.models import SolverOptions
from ode.solver import integrate_leaf
from tests.factories import PowerProfileFactory


@pytest.fixture
def params():
    return ConeParams(1, 1)


@pytest.fixture
def power_phi(params):
    return PowerProfileFactory(params=params)


@pytest.fixture
def solver_options():
    return SolverOptions()


@pytest.fixture(scope="session")
def power_leaf():
    """Leaf of the power profile p=6, b=0.01 for (k,l)=(1,1)."""
    params = ConeParams(1, 1)
    return integrate_leaf(PowerProfileFactory(params=params), params, SolverOptions())


@pytest.fixture(scope="session")
def area_leaf():
    """Leaf of the area profile for (k,l)=(3,3)."""
    return integrate_leaf(AreaProfile(), ConeParams(3, 3), SolverOptions())
