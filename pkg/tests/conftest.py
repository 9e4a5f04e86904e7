import warnings

import numpy as np
import pytest

from metivier import heisenberg, quaternionic


@pytest.fixture(scope="session")
def heis():
    return heisenberg(1)


@pytest.fixture(scope="session")
def heis2():
    return heisenberg(2)


@pytest.fixture(scope="session")
def quat():
    return quaternionic()


@pytest.fixture(autouse=True)
def _quiet_extent_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*boundary mass.*")
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
