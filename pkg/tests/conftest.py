import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_herm(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def qubit(theta, phase=0.0):
    return np.array([np.cos(theta / 2), np.exp(1j * phase) * np.sin(theta / 2)])
