import numpy as np
import pytest

from tpgkin.thermo import default_gas
from tpgkin.vgrid import build_grid


@pytest.fixture(scope="session")
def grid24():
    return build_grid(n=24, span=6.0)


@pytest.fixture(scope="session")
def grid16():
    return build_grid(n=16, span=6.0)


@pytest.fixture(params=["rotational-linear", "harmonic-vibrational", "tabulated"])
def gas(request):
    return default_gas(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
