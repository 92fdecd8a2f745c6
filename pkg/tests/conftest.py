import math

import pytest
from hypothesis import HealthCheck, settings

from core.grid import make_grid_1d, make_grid_2d
from core.params import BsParams, MgParams

settings.register_profile(
    "lab",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lab")


@pytest.fixture
def bs_params():
    return BsParams(r=0.05, sigma=0.2)


@pytest.fixture
def mg_params():
    """Parameters whose extended martingale constraint has its root at y = 0."""
    return MgParams(r=0.05, lam=-1.0, mu=0.5, zeta=1.0, alpha=1.0, rho=0.0)


@pytest.fixture
def mg_hand_params():
    """A = 0.115 and B = 0.05 at y = ln 0.1."""
    return MgParams(r=0.1, lam=0.01, mu=0.02, zeta=0.1, alpha=1.0, rho=0.0)


@pytest.fixture
def hand_y():
    return math.log(0.1)


@pytest.fixture
def grid_bs():
    return make_grid_1d(-2.0, 2.0, 401)


@pytest.fixture
def grid_unit():
    return make_grid_1d(-1.0, 1.0, 201)


@pytest.fixture
def grid_mg_small():
    return make_grid_2d(-1.0, 1.0, 41, -1.0, 1.0, 41)
