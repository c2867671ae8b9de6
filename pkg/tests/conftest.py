import numpy as np
import pytest

from echotop import EchoSolver, SpinRep, coupled_tops, single_top


@pytest.fixture(scope="session")
def rep20():
    return SpinRep(20)


@pytest.fixture(scope="session")
def top200():
    """Mid-size chaotic single top shared across tests."""
    return single_top(200, 30.0)


@pytest.fixture(scope="session")
def top200_solver(top200):
    return EchoSolver(top200)


@pytest.fixture(scope="session")
def coupled12():
    """Small coupled pair (subspace dimension 156)."""
    return coupled_tops(12, 20.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
