"""Shared fixtures: the default line network, its moments and a few operating points."""

import math
import sys
from pathlib import Path

import pytest

# Add repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.analytic import SystemParams
from src.topology import compute_moments, line_geometry

# Closed forms for the line network (source 0, dest 12, relays uniform on [1, 11], theta 2)
E_RHO_D = 1.0 / 11.0
E_RATIO = (1440.0 / 11.0 + 10.0 - 24.0 * math.log(11.0)) / 10.0
E_PRODUCT = (20.0 / 11.0 + math.log(11.0) / 3.0) / 1440.0


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo runs")


@pytest.fixture(scope="session")
def geometry():
    return line_geometry()


@pytest.fixture(scope="session")
def moments(geometry):
    return compute_moments(geometry)


@pytest.fixture
def params():
    """30 dB, p = 0.1, alpha = 0.5, epsilon = 0.1."""
    return SystemParams(gamma0=1000.0, p=0.1, alpha=0.5, epsilon=0.1)
