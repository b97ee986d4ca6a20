import numpy as np
import pytest

from dcmrank.degree_model import Algorithm1Config, BiDegreeSequence, table1_params


@pytest.fixture(scope="session")
def params():
    """alpha=2, beta=2.5, lambda1=1, lambda2 calibrated."""
    return table1_params()


@pytest.fixture(scope="session")
def alg1(params):
    return Algorithm1Config.for_params(params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_bideg(rng, n, max_deg=4):
    """Small balanced bi-degree sequence with arbitrary degrees."""
    N = rng.integers(0, max_deg + 1, n)
    D = rng.integers(0, max_deg + 1, n)
    diff = int(N.sum() - D.sum())
    if diff > 0:
        np.add.at(D, rng.integers(n, size=diff), 1)
    else:
        np.add.at(N, rng.integers(n, size=-diff), 1)
    return BiDegreeSequence(N, D)
