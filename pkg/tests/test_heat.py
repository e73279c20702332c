import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otkit.errors import GeometryError, StateError
from otkit.heat import (
    HeatOperator,
    apply_heat,
    convolutional_barycenter,
    convolutional_sinkhorn,
    cotangent_laplacian,
)
from otkit.measures import GridDensity, MeshDensity, normalize
from otkit.sinkhorn import sinkhorn_log_domain

from conftest import bump_1d, bump_2d


def flat_mesh(n, jitter=0.0, seed=0):
    c = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(c, c, indexing="ij")
    V = np.column_stack([X.ravel(), Y.ravel(), np.zeros(n * n)])
    if jitter:
        rng = np.random.default_rng(seed)
        inner = (X.ravel() > c[0]) & (X.ravel() < c[-1]) & (Y.ravel() > c[0]) & (Y.ravel() < c[-1])
        V[inner, :2] += rng.uniform(-jitter, jitter, (inner.sum(), 2)) / n
    idx = np.arange(n * n).reshape(n, n)
    a, b, cc, d = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel(), idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    T = np.vstack([np.c_[a, b, cc], np.c_[a, cc, d]])
    return V, T


def test_cotangent_laplacian_annihilates_constants_and_linears():
    V, T = flat_mesh(6, jitter=0.2)
    L = cotangent_laplacian(V, T).toarray()
    np.testing.assert_allclose(L @ np.ones(len(V)), 0, atol=1e-12)
    np.testing.assert_allclose(L, L.T, atol=1e-14)
    n = 6
    inner = [i * n + j for i in range(1, n - 1) for j in range(1, n - 1)]
    np.testing.assert_allclose((L @ V[:, 0])[inner], 0, atol=1e-12)


def test_cotangent_rejects_degenerate():
    V = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0.0]])
    with pytest.raises(GeometryError):
        cotangent_laplacian(V, np.array([[0, 1, 2]]))


@pytest.mark.parametrize("shape", [(20,), (12, 9)])
def test_grid_operator_invariants(shape, rng):
    g = GridDensity(np.ones(shape))
    op = HeatOperator.for_grid(g, 0.01)
    np.testing.assert_allclose(apply_heat(op, np.ones(shape)), 1.0, atol=1e-12)
    f, h = rng.random(shape), rng.random(shape)
    a = op.areas
    assert np.sum(apply_heat(op, f) * h * a) == pytest.approx(np.sum(f * apply_heat(op, h) * a), rel=1e-12)
    delta = np.zeros(shape)
    delta[tuple(s // 2 for s in shape)] = 1.0
    out = apply_heat(op, delta)
    assert out.min() >= -1e-12
    assert abs(out.sum() - 1.0) <= 1e-10


def test_grid_kernel_width():
    g = GridDensity(np.ones(400))
    alpha = 0.002
    op = HeatOperator.for_grid(g, alpha)
    delta = np.zeros(400)
    delta[200] = 1.0
    out = apply_heat(op, delta)
    x = g.axis_centers(0)
    mean = out @ x
    # sigma^2 = 2t = alpha
    assert out @ (x - mean) ** 2 == pytest.approx(alpha, rel=1e-3)


def test_mesh_operator_invariants(rng):
    V, T = flat_mesh(12, jitter=0.25, seed=1)
    mesh = MeshDensity(V, T, np.ones(len(V)))
    op = HeatOperator.for_mesh(mesh, 0.01)
    np.testing.assert_allclose(apply_heat(op, np.ones(len(V))), 1.0, atol=1e-8)
    f, h = rng.random(len(V)), rng.random(len(V))
    a = op.areas
    assert np.sum(apply_heat(op, f) * h * a) == pytest.approx(np.sum(f * apply_heat(op, h) * a), rel=1e-8)
    assert apply_heat(op, f).min() >= -1e-12
    assert np.sum(apply_heat(op, f) * a) == pytest.approx(np.sum(f * a), rel=1e-10)


def _mesh_vs_grid_l1(substeps):
    n = 40
    V, T = flat_mesh(n)
    mesh = MeshDensity(V, T, np.ones(n * n))
    grid = GridDensity(np.ones((n, n)))
    alpha = 0.02
    f = np.zeros((n, n))
    f[n // 2, n // 2] = 1.0
    mg = apply_heat(HeatOperator.for_grid(grid, alpha), f).ravel() * grid.cell_volume
    mm = apply_heat(HeatOperator.for_mesh(mesh, alpha, substeps), f.ravel()) * mesh.vertex_area
    return np.abs(mg / mg.sum() - mm / mm.sum()).sum()


def test_flat_mesh_matches_grid_gaussian_with_fine_time_steps():
    assert _mesh_vs_grid_l1(200) <= 0.02


def test_flat_mesh_default_substeps_error_recorded():
    # implicit Euler with 10 substeps over-smooths; the gap shrinks as substeps grow
    e10, e50 = _mesh_vs_grid_l1(10), _mesh_vs_grid_l1(50)
    assert e50 < e10 <= 0.08


def test_unassembled_operator():
    with pytest.raises(StateError):
        apply_heat(HeatOperator(t=0.1, mode="grid", shape=(3,), spacing=(1 / 3,), areas=np.ones(3)), np.ones(3))


def test_conv_matches_explicit_kernel():
    a, b = bump_2d(16, (0.35, 0.4), 0.08), bump_2d(16, (0.6, 0.55), 0.1)
    alpha = 0.005
    res = convolutional_sinkhorn(a, b, HeatOperator.for_grid(a, alpha))
    pts = a.cell_centers()
    C = np.sum((pts[:, None] - pts[None]) ** 2, axis=-1)
    _, _, (cost, _) = sinkhorn_log_domain(a.masses().ravel(), b.masses().ravel(), C, 2 * alpha)
    assert res.converged
    assert abs(res.cost - cost) <= 0.03 * cost


def test_conv_symmetric_and_objective_dominates():
    a, b = bump_2d(16, (0.3, 0.4)), bump_2d(16, (0.6, 0.5))
    op = HeatOperator.for_grid(a, 0.004)
    ab, ba = convolutional_sinkhorn(a, b, op), convolutional_sinkhorn(b, a, op)
    assert abs(ab.cost - ba.cost) <= 1e-8
    assert ab.objective >= ab.cost - 1e-12


def test_conv_translated_bumps_32():
    a, b = bump_2d(32, (0.375, 0.5)), bump_2d(32, (0.625, 0.5))
    res = convolutional_sinkhorn(a, b, HeatOperator.for_grid(a, 0.001))
    assert abs(np.sqrt(res.cost) - 0.25) <= 0.05 * 0.25


@pytest.mark.parametrize("dim", [1, 2])
def test_conv_identical_inputs_floor(dim):
    alpha = 0.002
    mu = bump_1d(64, 0.5) if dim == 1 else bump_2d(32, (0.5, 0.5))
    res = convolutional_sinkhorn(mu, mu, HeatOperator.for_grid(mu, alpha))
    # blur floor: about 0.85 alpha in 1D and 1.7 alpha in 2D for these bumps
    assert res.cost < 1.0 * dim * alpha


def test_varadhan_on_flat_mesh():
    V, T = flat_mesh(40)
    n = len(V)
    i, j = 10 * 40 + 12, 28 * 40 + 25
    dist = np.linalg.norm(V[i] - V[j])
    mesh = MeshDensity(V, T, np.ones(n))
    d0, d1 = np.zeros(n), np.zeros(n)
    d0[i], d1[j] = 1 / mesh.vertex_area[i], 1 / mesh.vertex_area[j]
    alpha = 0.02 * 2.0  # 0.02 * diam^2 of the unit square
    res = convolutional_sinkhorn(mesh.with_density(d0), mesh.with_density(d1), HeatOperator.for_mesh(mesh, alpha))
    assert abs(np.sqrt(res.cost) / dist - 1) <= 0.10


def test_conv_barycenter():
    a, b = bump_1d(80, 0.25, 0.05), bump_1d(80, 0.75, 0.05)
    op = HeatOperator.for_grid(a, 2e-4)
    same = convolutional_barycenter([a, a], [0.5, 0.5], op)
    np.testing.assert_allclose(same, a.values, atol=1e-6 * a.values.max())
    first = convolutional_barycenter([a, b], [1.0, 0.0], op)
    np.testing.assert_allclose(first, a.values, atol=1e-6 * a.values.max())
    mid = convolutional_barycenter([a, b], [0.5, 0.5], op)
    x = a.axis_centers(0)
    com = np.sum(mid * x) / np.sum(mid)
    assert abs(com - 0.5) <= 1 / 80


@given(st.floats(1e-3, 0.05))
def test_grid_operator_mass_conservation(alpha):
    g = GridDensity(np.ones((10, 7)))
    f = np.random.default_rng(0).random((10, 7))
    assert apply_heat(HeatOperator.for_grid(g, alpha), f).sum() == pytest.approx(f.sum(), rel=1e-12)
