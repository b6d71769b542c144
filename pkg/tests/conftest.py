"""
Pytest configuration and shared fixtures.
"""

import numpy as np
import pytest

from batchvote.models import ModelParams


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-grid checks (deselect with -m 'not slow')")


@pytest.fixture
def mid_params() -> ModelParams:
    """Prior below the size-3 upper endpoint at q = 0.6, where K̄ = 7."""
    return ModelParams(mu=0.45, q=0.6)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
