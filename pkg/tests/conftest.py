import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from otkit.measures import DiscreteMeasure, GridDensity, normalize

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def bump_1d(m, center, width=0.06):
    x = (np.arange(m) + 0.5) / m
    return normalize(GridDensity(np.exp(-((x - center) ** 2) / (2 * width**2))))


def bump_2d(m, center, width=0.07):
    c = (np.arange(m) + 0.5) / m
    X, Y = np.meshgrid(c, c, indexing="ij")
    g = np.exp(-((X - center[0]) ** 2 + (Y - center[1]) ** 2) / (2 * width**2))
    return normalize(GridDensity(g))


def random_simplex(rng, k):
    v = rng.random(k) + 1e-3
    return v / v.sum()


def random_atoms_1d(rng, k):
    return DiscreteMeasure(rng.random(k), random_simplex(rng, k))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
