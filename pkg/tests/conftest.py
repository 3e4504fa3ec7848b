import numpy as np
import pytest

from dirlap import special


@pytest.fixture(scope="session")
def lut2():
    return special.default_k_lookup(2)


@pytest.fixture(scope="session")
def lut3():
    return special.default_k_lookup(3)


@pytest.fixture(scope="session")
def lut4():
    return special.default_k_lookup(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
