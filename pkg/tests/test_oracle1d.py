import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otkit.lp import emd
from otkit.measures import DiscreteMeasure, GridDensity, build_cost_matrix
from otkit.oracle1d import (
    UnsupportedDimensionError,
    UnsupportedExponentError,
    semidiscrete_1d,
    w1_cdf,
    wp_quantile,
)

from conftest import bump_1d, random_atoms_1d


def delta(x):
    return DiscreteMeasure([x], [1.0])


def test_w1_examples():
    assert w1_cdf(delta(0), delta(3)) == 3
    assert w1_cdf(DiscreteMeasure([0, 1], [0.5, 0.5]), DiscreteMeasure([2, 3], [0.5, 0.5])) == 2


def test_w1_linear_in_shift():
    base = np.array([0.2, 0.5, 0.3])
    pts = np.array([0.0, 0.1, 0.25])
    mu = DiscreteMeasure(pts, base)
    d = [w1_cdf(mu, DiscreteMeasure(pts + s, base)) for s in (1, 2, 3, 4)]
    np.testing.assert_allclose(d, [1, 2, 3, 4], rtol=1e-14)


@pytest.mark.parametrize("p", [1, 1.5, 2, 3])
def test_wp_delta_pair(p):
    assert wp_quantile(delta(0.2), delta(1.7), p) == pytest.approx(1.5, rel=1e-14)


def test_wp_uniform_translation():
    u0 = GridDensity(np.ones(4), extent=[(0, 1)])
    u1 = GridDensity(np.ones(7), extent=[(0.5, 1.5)])
    assert wp_quantile(u0, u1, 2) == pytest.approx(0.5, rel=1e-14)


def test_wp_agrees_with_lp(rng):
    for _ in range(10):
        a, b = random_atoms_1d(rng, 16), random_atoms_1d(rng, 16)
        lp = emd(a.weights, b.weights, build_cost_matrix(a, b, 2))
        assert abs(wp_quantile(a, b, 2) ** 2 - lp) <= 1e-9


def test_w1_matches_wp1_on_grids():
    a, b = bump_1d(64, 0.3), bump_1d(64, 0.6, 0.1)
    assert w1_cdf(a, b) == pytest.approx(wp_quantile(a, b, 1), rel=1e-12)


def test_errors():
    with pytest.raises(UnsupportedExponentError):
        wp_quantile(delta(0), delta(1), 0.5)
    with pytest.raises(UnsupportedDimensionError):
        w1_cdf(DiscreteMeasure([[0, 0]], [1]), delta(0))


@given(st.integers(0, 10**6), st.sampled_from([1.0, 2.0]))
def test_metric_axioms(seed, p):
    rng = np.random.default_rng(seed)
    a, b, c = (random_atoms_1d(rng, int(rng.integers(1, 12))) for _ in range(3))
    assert wp_quantile(a, a, p) == 0
    assert wp_quantile(a, b, p) == pytest.approx(wp_quantile(b, a, p), abs=1e-12)
    assert wp_quantile(a, c, p) <= wp_quantile(a, b, p) + wp_quantile(b, c, p) + 1e-12


def test_semidiscrete_examples():
    u = GridDensity(np.ones(8))
    ia = semidiscrete_1d(delta(0.3), u)
    assert (ia.lower[0], ia.upper[0]) == (0, 1)
    ia = semidiscrete_1d(DiscreteMeasure([0.9, 0.1], [0.5, 0.5]), u)
    np.testing.assert_allclose(np.c_[ia.lower, ia.upper], [[0, 0.5], [0.5, 1]])
    assert ia.source_index.tolist() == [1, 0]
    ia = semidiscrete_1d(DiscreteMeasure([0.1, 0.9], [0.25, 0.75]), u)
    np.testing.assert_allclose(np.c_[ia.lower, ia.upper], [[0, 0.25], [0.25, 1]])


@given(st.integers(0, 10**6))
def test_semidiscrete_masses_and_order(seed):
    rng = np.random.default_rng(seed)
    mu = random_atoms_1d(rng, int(rng.integers(1, 20)))
    rho = GridDensity(rng.random(int(rng.integers(2, 40))) + 0.05)
    rho = GridDensity(rho.values / rho.mass)
    ia = semidiscrete_1d(mu, rho)
    m = ia.interval_masses(rho)
    np.testing.assert_allclose(m, ia.weights, atol=1e-10)
    assert abs(m.sum() - 1) < 1e-10
    assert np.all(ia.upper[:-1] <= ia.lower[1:] + 1e-15)
