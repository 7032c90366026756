"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from qqlab.boolfn import make_named


@pytest.fixture
def rng():
    """Seeded generator so random instances are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def or2():
    return make_named("OR", n=2)


@pytest.fixture
def or3():
    return make_named("OR", n=3)


@pytest.fixture
def and2():
    return make_named("AND", n=2)


@pytest.fixture
def parity3():
    return make_named("PARITY", n=3)


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers",
        "integration: end-to-end tests through the CLI or the MCP tool layer"
    )
    config.addinivalue_line(
        "markers",
        "slow: exhaustive sweeps that take more than a few seconds"
    )
