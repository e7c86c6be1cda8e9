"""Shared fixtures: reference orbits and a seeded random generator."""

import numpy as np
import pytest

from src.core import KeplerState


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def circular_orbit():
    """Unit circular orbit, k=1, period 2*pi."""
    return KeplerState(q=[1.0, 0.0, 0.0], p=[0.0, 1.0, 0.0], t=0.0)


@pytest.fixture
def eccentric_orbit():
    """e=0.6 orbit at perihelion, k=1, E=-0.5, a=1, period 2*pi."""
    return KeplerState(q=[0.4, 0.0, 0.0], p=[0.0, 2.0, 0.0], t=0.0)


@pytest.fixture
def hyperbolic_orbit():
    """E=1 flyby, k=1."""
    return KeplerState(q=[1.0, 0.0, 0.0], p=[0.0, 2.0, 0.0], t=0.0)
