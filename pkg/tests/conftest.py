import numpy as np
import pytest

from solhmc import bridge_prior, make_target


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_prior():
    return bridge_prior(100.0, 8)


@pytest.fixture
def small_dw(small_prior):
    return make_target("double-well", small_prior, 32)


@pytest.fixture
def small_gauss(small_prior):
    return make_target("gaussian", small_prior, 32)


def mild_dw(n_modes=16, interval=1.0, grid=None):
    """Double-well target on a short interval: non-stiff at desk step sizes."""
    prior = bridge_prior(interval, n_modes)
    return make_target("double-well", prior, grid or 4 * n_modes)
