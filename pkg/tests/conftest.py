import numpy as np
import pytest

from magrelax import PeriodicGrid


@pytest.fixture
def grid64():
    return PeriodicGrid(64)


@pytest.fixture
def grid200():
    return PeriodicGrid(200)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
