"""
Shared fixtures: the default irrational tori and the square control torus.
"""
import math

import numpy as np
import pytest

from spectral.torus import IrrationalTorus, default_torus, rational_torus


@pytest.fixture
def torus2() -> IrrationalTorus:
    """alpha = (1, sqrt 2)."""
    return default_torus(2)


@pytest.fixture
def torus3() -> IrrationalTorus:
    """alpha = (1, sqrt 2, sqrt 3)."""
    return default_torus(3)


@pytest.fixture
def square2() -> IrrationalTorus:
    return rational_torus(2)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def _direct_sum(modes: np.ndarray, coeffs: np.ndarray, grid_size: int) -> np.ndarray:
    d = modes.shape[1]
    axes = np.meshgrid(*([np.arange(grid_size) / grid_size] * d), indexing="ij")
    x = np.stack(axes, axis=-1)
    out = np.zeros((grid_size,) * d, dtype=np.complex128)
    for n, c in zip(modes, coeffs):
        out += c * np.exp(2j * math.pi * (x @ n.astype(np.float64)))
    return out


@pytest.fixture
def direct_sum():
    """O(G^d #modes) evaluation of sum_n c_n exp(2 pi i n . m / G) on the grid."""
    return _direct_sum
