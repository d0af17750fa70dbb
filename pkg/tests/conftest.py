import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")

JORDAN = np.array([[0, 1], [0, 0]], dtype=complex)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, n):
    Q, R = np.linalg.qr(crandn(rng, n, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_normal(rng, n, scale=1.0):
    lam = scale * crandn(rng, n)
    Q = random_unitary(rng, n)
    return (Q * lam) @ Q.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def jordan():
    return JORDAN.copy()
