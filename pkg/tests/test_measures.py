import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from otkit.measures import (
    CostMatrix,
    DimensionError,
    DiscreteMeasure,
    GridDensity,
    InterpolationSequence,
    MeasureError,
    MeshDensity,
    TransportPlan,
    ZeroMassError,
    build_cost_matrix,
    grid_to_discrete,
    normalize,
)


def test_cost_single_pair():
    C = build_cost_matrix(DiscreteMeasure([0.0], [1.0]), DiscreteMeasure([3.0], [1.0]), 2)
    assert C.entries.tolist() == [[9.0]]


def test_cost_hand_evaluated_norms():
    src = DiscreteMeasure([[0, 0], [1, 0]], [0.5, 0.5])
    dst = DiscreteMeasure([[0, 1]], [1.0])
    C = build_cost_matrix(src, dst, 1).entries
    ref = np.array([[np.hypot(0, 1)], [np.hypot(1, 1)]])
    np.testing.assert_allclose(C, ref, rtol=0, atol=1e-15)
    assert C[1, 0] == pytest.approx(np.sqrt(2))


def test_cost_dimension_mismatch():
    with pytest.raises(DimensionError):
        build_cost_matrix(DiscreteMeasure([0.0], [1]), DiscreteMeasure([[0.0, 1.0]], [1]), 2)


@given(
    pts=arrays(float, st.tuples(st.integers(1, 12), st.integers(1, 3)), elements=st.floats(-5, 5)),
    p=st.floats(0.5, 3),
)
def test_cost_self_symmetric_zero_diagonal(pts, p):
    m = DiscreteMeasure(pts, np.ones(len(pts)))
    C = build_cost_matrix(m, m, p).entries
    assert np.all(np.diag(C) == 0)
    np.testing.assert_array_equal(C, C.T)


def test_normalize_examples():
    g = normalize(GridDensity(np.full((2, 2), 2.0)))
    np.testing.assert_allclose(g.values, 1.0)
    np.testing.assert_allclose(normalize(DiscreteMeasure([0, 1], [2, 2])).weights, [0.5, 0.5])
    np.testing.assert_allclose(normalize(DiscreteMeasure([0, 1], [1, 3])).weights, [0.25, 0.75])


def test_normalize_zero_mass():
    with pytest.raises(ZeroMassError):
        normalize(GridDensity(np.zeros(4)))


@given(arrays(float, st.integers(2, 30), elements=st.floats(0, 10)).filter(lambda a: a.sum() > 1e-3))
def test_normalize_preserves_ratios(vals):
    g = normalize(GridDensity(vals))
    assert abs(g.mass - 1) < 1e-12
    np.testing.assert_allclose(g.values * vals.sum(), vals * g.values.sum(), rtol=1e-12, atol=1e-300)


def test_grid_to_discrete_examples():
    d = grid_to_discrete(GridDensity([1.0, 1.0]))
    np.testing.assert_allclose(d.points[:, 0], [0.25, 0.75])
    np.testing.assert_allclose(d.weights, [0.5, 0.5])
    d = grid_to_discrete(GridDensity([2.0, 0.0]))
    assert d.size == 1 and d.points[0, 0] == 0.25 and d.weights[0] == 1.0
    d = grid_to_discrete(GridDensity(np.ones((2, 2))))
    assert d.size == 4
    np.testing.assert_allclose(d.weights, 0.25)
    assert {tuple(p) for p in d.points} == {(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)}


@given(arrays(float, st.tuples(st.integers(2, 9), st.integers(2, 9)), elements=st.floats(0, 5)).filter(
    lambda a: a.sum() > 1e-3))
def test_grid_to_discrete_mass_roundtrip(vals):
    d = grid_to_discrete(normalize(GridDensity(vals)))
    assert abs(d.weights.sum() - 1) < 1e-12


def test_duplicate_atoms_merged():
    d = DiscreteMeasure([0.5, 0.1, 0.5], [1, 2, 3])
    assert d.size == 2
    np.testing.assert_allclose(d.points[:, 0], [0.5, 0.1])
    np.testing.assert_allclose(d.weights, [4, 2])


@pytest.mark.parametrize("bad", [[np.nan, 1.0], [-1.0, 2.0], [np.inf, 0.0]])
def test_constructors_reject_bad_values(bad):
    with pytest.raises(MeasureError):
        GridDensity(bad)
    with pytest.raises(MeasureError):
        DiscreteMeasure([0.0, 1.0], bad)


def test_grid_needs_two_cells():
    with pytest.raises(DimensionError):
        GridDensity([1.0])


def test_mesh_validation():
    V = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
    m = MeshDensity(V, [[0, 1, 2], [1, 3, 2]], np.ones(4))
    np.testing.assert_allclose(m.vertex_area, [1 / 6, 1 / 3, 1 / 3, 1 / 6])
    with pytest.raises(MeasureError):
        MeshDensity(V, [[0, 1, 2], [1, 1, 2]], np.ones(4))
    with pytest.raises(MeasureError):
        MeshDensity(V + [[5, 5, 0], [6, 5, 0], [5, 6, 0]], [[0, 1, 2], [4, 5, 6]], np.ones(7))


def test_cost_matrix_rejects_negative():
    with pytest.raises(MeasureError):
        CostMatrix([[1.0, -1.0]])


def test_plan_cost_and_marginals():
    T = np.array([[0.25, 0.25], [0.0, 0.5]])
    C = np.array([[0.0, 1.0], [1.0, 0.0]])
    plan = TransportPlan.from_matrix(T, [0.5, 0.5], [0.25, 0.75], C)
    assert plan.cost == 0.25
    assert plan.marginal_errors() == (0.0, 0.0)
    i, j, m = plan.triples()
    assert list(zip(i, j)) == [(0, 0), (0, 1), (1, 1)]


def test_interpolation_sequence_times():
    g = GridDensity([1.0, 1.0])
    with pytest.raises(MeasureError):
        InterpolationSequence((g, g), [0.0, 0.5])
    assert len(InterpolationSequence((g, g, g), [0.0, 0.5, 1.0])) == 3
