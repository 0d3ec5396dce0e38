"""
Shared fixtures: seeded generators and small canonical matrices
"""

import numpy as np
import pytest

from blaschke import FiniteBlaschke, monomial


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def jordan2():
    return np.array([[0, 1], [0, 0]], dtype=complex)


@pytest.fixture
def cubic_blaschke():
    return FiniteBlaschke([0.3, -0.2 + 0.4j, 0.5j], np.exp(0.7j))


@pytest.fixture
def z_squared():
    return monomial(2)
