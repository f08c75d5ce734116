import numpy as np
import pytest

from rational_spde.models.fem import CoefficientField, assemble, matern_operators
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import build_rect_mesh
from rational_spde.models.observations import ObservationSet
from rational_spde.models.spde import build_model


@pytest.fixture
def unit_mesh():
    return build_rect_mesh(4, 4)


@pytest.fixture
def small_mesh():
    return build_rect_mesh(8, 8)


@pytest.fixture
def base_ops(small_mesh):
    return assemble(small_mesh, CoefficientField(kappa2=0.0))


@pytest.fixture
def params():
    return MaternParams(kappa=6.0, phi2=1.0, nu=0.5)


@pytest.fixture
def matern_ops(base_ops, params):
    return matern_operators(base_ops, params.kappa)


@pytest.fixture
def model(matern_ops, params):
    return build_model(matern_ops, params.beta, 2, tau=params.tau)


@pytest.fixture
def observations(small_mesh):
    rng = np.random.default_rng(7)
    locations = rng.uniform(0.05, 0.95, size=(30, 2))
    y = rng.standard_normal((2, 30))
    return ObservationSet.build(small_mesh, locations, y, 0.1)
