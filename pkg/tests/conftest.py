"""Shared fixtures: seeded generators and small canonical tensors.

Every stochastic test draws from a fixed seed, so failures replay exactly.
"""

import os

import numpy as np
import pytest

import fast_disentangle.context as ctx
from fast_disentangle.disentangle import Dims
from fast_disentangle.generators import gaussian_tensor
from fast_disentangle.tensors import make_rng


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240611)


@pytest.fixture
def gaussian2(rng):
    """Gaussian tensor with all dims 2 (4 x 2 x 2)."""
    return gaussian_tensor(Dims(2, 2, 2, 2), rng)


@pytest.fixture
def gaussian4(rng):
    """Gaussian tensor with all dims 4 (16 x 4 x 4)."""
    return gaussian_tensor(Dims(4, 4, 4, 4), rng)


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """No FASTDIS_* leakage between tests; settings are re-read per test."""
    for key in [k for k in os.environ if k.startswith("FASTDIS_")]:
        monkeypatch.delenv(key, raising=False)
    ctx.reset_settings()
    yield
    ctx.reset_settings()
