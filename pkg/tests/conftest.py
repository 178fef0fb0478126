import numpy as np
import pytest

from specbound import OrthonormalFrame, orthonormalize


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_frame(n: int, q: int, rng: np.random.Generator) -> OrthonormalFrame:
    raw = rng.standard_normal((n, q)) + 1j * rng.standard_normal((n, q))
    return orthonormalize(raw)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240517)
