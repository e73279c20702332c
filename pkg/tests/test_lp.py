import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otkit.errors import InfeasibleMarginalsError, InvalidCostError
from otkit.lp import emd, solve_lp, verify_optimality
from otkit.measures import DiscreteMeasure, DualPotentials, TransportPlan, build_cost_matrix
from otkit.oracle1d import w1_cdf, wp_quantile

from conftest import random_atoms_1d, random_simplex


def test_identity_instance():
    v = np.array([0.2, 0.3, 0.5])
    x = DiscreteMeasure([0.0, 1.0, 2.0], v)
    C = build_cost_matrix(x, x, 1)
    plan, duals = solve_lp(v, v, C)
    assert plan.cost == 0
    np.testing.assert_allclose(plan.matrix, np.diag(v))


def test_forced_plan():
    plan, _ = solve_lp([1.0], [0.5, 0.5], [[1.0, 3.0]])
    np.testing.assert_allclose(plan.matrix, [[0.5, 0.5]])
    assert plan.cost == 2


@pytest.mark.parametrize("p", [1, 2])
def test_agrees_with_1d_oracle(rng, p):
    for _ in range(20):
        a, b = random_atoms_1d(rng, int(rng.integers(1, 65))), random_atoms_1d(rng, int(rng.integers(1, 65)))
        lp = emd(a.weights, b.weights, build_cost_matrix(a, b, p))
        ref = w1_cdf(a, b) if p == 1 else wp_quantile(a, b, 2) ** 2
        assert abs(lp - ref) <= 1e-9 * (1 + ref)


def test_basic_solution_sparsity_and_certificate(rng):
    for _ in range(30):
        k1, k2 = rng.integers(1, 30, size=2)
        v, w = random_simplex(rng, k1), random_simplex(rng, k2)
        C = rng.random((k1, k2))
        plan, duals, info = solve_lp(v, w, C, return_info=True)
        assert len(info.basis_rows) == k1 + k2 - 1
        assert plan.nnz <= k1 + k2 - 1
        cert = verify_optimality(plan, duals, C)
        assert cert, cert.violations
        assert cert.duality_gap <= 1e-9 * (1 + plan.cost)
        reduced = C - duals.phi[:, None] - duals.psi[None, :]
        assert np.all(np.abs(reduced[info.basis_rows, info.basis_cols]) <= 1e-12)


def test_certificate_flags_primal_perturbation(rng):
    v, w = random_simplex(rng, 5), random_simplex(rng, 6)
    C = rng.random((5, 6))
    plan, duals = solve_lp(v, w, C)
    bad = TransportPlan(plan.matrix, v + np.r_[1e-3, np.zeros(4)], w, plan.cost)
    cert = verify_optimality(bad, duals, C, tol=1e-6)
    assert not cert and "primal_infeasible" in cert.violations


def test_certificate_flags_zero_duals():
    v = np.array([1.0, 0.0])
    w = np.array([0.0, 1.0])
    C = np.array([[1.0, 2.0], [3.0, 4.0]])
    plan, _ = solve_lp(v, w, C)
    cert = verify_optimality(plan, DualPotentials(np.zeros(2), np.zeros(2)), C)
    assert "slackness_violated" in cert.violations


def test_emd_two_atoms():
    assert emd([1.0, 0.0], [0.0, 1.0], [[0.0, 0.7], [0.7, 0.0]]) == pytest.approx(0.7)


def test_input_errors():
    with pytest.raises(InfeasibleMarginalsError):
        solve_lp([0.5, 0.5], [0.7, 0.5], np.ones((2, 2)))
    with pytest.raises(InvalidCostError):
        solve_lp([1.0], [1.0], [[np.nan]])
    with pytest.raises(InvalidCostError):
        solve_lp([1.0], [1.0], np.ones((1, 2)))


def test_marginal_slack_renormalized():
    plan, duals = solve_lp([0.5, 0.5 + 5e-9], [1.0], [[1.0], [2.0]])
    assert abs(plan.matrix.sum() - 1) < 1e-15


@given(st.integers(0, 10**6))
def test_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    k1, k2 = rng.integers(1, 12, size=2)
    v, w, C = random_simplex(rng, k1), random_simplex(rng, k2), rng.random((k1, k2))
    perm = rng.permutation(k1)
    assert emd(v, w, C) == pytest.approx(emd(v[perm], w, C[perm]), abs=1e-12)


@given(st.integers(0, 10**6))
def test_emd_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 10))
    pts = DiscreteMeasure(rng.random((k, 2)), np.ones(k))
    C = build_cost_matrix(pts, pts, 1)
    v, w, u = (random_simplex(rng, k) for _ in range(3))
    assert emd(v, v, C) <= 1e-15
    assert abs(emd(v, w, C) - emd(w, v, C)) <= 1e-10
    assert emd(v, u, C) <= emd(v, w, C) + emd(w, u, C) + 1e-9
