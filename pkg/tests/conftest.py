import numpy as np
import pytest

from mrimetrics.grid import ImageGrid
from mrimetrics.phantom import make_phantom


@pytest.fixture(scope="session")
def phantom():
    return make_phantom(42)


@pytest.fixture(scope="session")
def phantom_pair():
    return make_phantom(42), make_phantom(43)


@pytest.fixture(scope="session")
def small_phantoms():
    return [make_phantom(900 + i) for i in range(6)]


def random_grid(rng, height=16, width=16, lo=0.0, hi=100.0):
    return ImageGrid(rng.uniform(lo, hi, (height, width)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
