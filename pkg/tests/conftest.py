import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def haar_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def haar_orthogonal(n, rng):
    z = rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diag(r))


def random_spd(n, rng, shift=0.5):
    a = rng.uniform(-1.0, 1.0, size=(n, n))
    return a @ a.T + shift * np.eye(n)
