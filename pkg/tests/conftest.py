import numpy as np
import pytest

from gecot.channel import GecSpec, bsc, capacity_solve, identity_dmc


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def bec03():
    """Binary erasure channel: identity inner channel, p_star = 0.3."""
    return GecSpec(inner=identity_dmc(2), erasure_prob=0.3)


@pytest.fixture(scope="session")
def bec03_solution(bec03):
    return capacity_solve(bec03.inner)


@pytest.fixture(scope="session")
def gec_bsc01():
    """Crossover-0.1 inner channel behind p_star = 0.3 erasures."""
    return GecSpec(inner=bsc(0.1), erasure_prob=0.3)
