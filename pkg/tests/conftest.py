"""
Shared fixtures
"""
import sys
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.demo import demo_cloud  # noqa: E402
from src.smoothing import GridDomain  # noqa: E402


@pytest.fixture(autouse=True)
def quiet_logs():
    logger.remove()
    logger.add(sys.stderr, level="WARNING")
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_cloud():
    return demo_cloud(n=80, seed=7)


@pytest.fixture
def square33():
    return GridDomain.square(0.0, 1.0, n=33)


@pytest.fixture
def disc65():
    return GridDomain.disc(1.0, n=65)
