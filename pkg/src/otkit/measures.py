"""Probability measure containers, cost matrices and plan/potential types.

All containers are frozen dataclasses holding read-only numpy arrays, so they
can be shared freely between threads.  Constructors validate their inputs and
raise :class:`MeasureError` (or a subclass) on NaN, negative mass or
malformed shapes.

Total mass is *not* forced to one at construction; :func:`normalize` produces
the probability version and solvers check normalization at their boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix

__all__ = [
    "MeasureError",
    "DimensionError",
    "ZeroMassError",
    "DiscreteMeasure",
    "GridDensity",
    "MeshDensity",
    "CostMatrix",
    "TransportPlan",
    "DualPotentials",
    "InterpolationSequence",
    "build_cost_matrix",
    "normalize",
    "grid_to_discrete",
    "require_normalized",
]

MASS_TOL = 1e-10


class MeasureError(ValueError):
    """Invalid measure or cost data."""


class DimensionError(MeasureError):
    pass


class ZeroMassError(MeasureError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_values(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise MeasureError(f"{what} contain NaN or infinite entries")
    if np.any(values < 0):
        raise MeasureError(f"{what} must be nonnegative")


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud ``sum_i a_i delta_{x_i}`` in 1, 2 or 3 dimensions.

    Duplicate atoms are merged (weights summed) at construction.  ``points``
    always has shape ``(k, d)``; a 1D list of positions is accepted and
    reshaped to ``(k, 1)``.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] not in (1, 2, 3):
            raise DimensionError("points must have shape (k, d) with d in {1, 2, 3}")
        if pts.shape[0] != w.shape[0]:
            raise DimensionError(
                f"{pts.shape[0]} points but {w.shape[0]} weights"
            )
        if pts.shape[0] == 0:
            raise ZeroMassError("measure has no atoms")
        if not np.all(np.isfinite(pts)):
            raise MeasureError("points contain NaN or infinite entries")
        _check_values(w, "weights")
        uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
        if uniq.shape[0] != pts.shape[0]:
            merged = np.zeros(uniq.shape[0])
            np.add.at(merged, inverse.ravel(), w)
            # keep first-occurrence order so callers' indexing stays stable
            first = np.full(uniq.shape[0], pts.shape[0])
            np.minimum.at(first, inverse.ravel(), np.arange(pts.shape[0]))
            order = np.argsort(first)
            pts, w = uniq[order], merged[order]
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class GridDensity:
    """Piecewise-constant density on a regular axis-aligned grid (d = 1 or 2).

    ``values[i]`` (1D) or ``values[i, j]`` (2D) is the density on the cell
    whose lower corner is ``lo + (i, j) * spacing``.  Axis 0 is the first
    coordinate.  ``extent`` is ``((lo_0, hi_0), ...)`` and defaults to the unit
    box.
    """

    values: np.ndarray
    extent: tuple = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim not in (1, 2):
            raise DimensionError("grid densities must be 1D or 2D")
        if any(s < 2 for s in vals.shape):
            raise DimensionError("every grid axis needs at least 2 cells")
        _check_values(vals, "grid values")
        ext = self.extent
        if ext is None:
            ext = tuple((0.0, 1.0) for _ in range(vals.ndim))
        ext = tuple(tuple(float(v) for v in ax) for ax in np.reshape(ext, (-1, 2)))
        if len(ext) != vals.ndim:
            raise DimensionError("extent must have one (lo, hi) pair per axis")
        if any(not hi > lo for lo, hi in ext):
            raise MeasureError("extent upper bounds must exceed lower bounds")
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "extent", ext)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / n for (lo, hi), n in zip(self.extent, self.shape)])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def axis_centers(self, axis: int) -> np.ndarray:
        lo, hi = self.extent[axis]
        n = self.shape[axis]
        return lo + (np.arange(n) + 0.5) * (hi - lo) / n

    def axis_edges(self, axis: int) -> np.ndarray:
        lo, hi = self.extent[axis]
        return np.linspace(lo, hi, self.shape[axis] + 1)

    def cell_centers(self) -> np.ndarray:
        """Cell centers as an ``(n_cells, d)`` array in ``values.ravel()`` order."""
        axes = np.meshgrid(*[self.axis_centers(a) for a in range(self.dim)], indexing="ij")
        return np.stack([ax.ravel() for ax in axes], axis=1)

    def masses(self) -> np.ndarray:
        return self.values * self.cell_volume

    def with_values(self, values) -> "GridDensity":
        return GridDensity(values, self.extent)


def _triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    e1 = vertices[triangles[:, 1]] - vertices[triangles[:, 0]]
    e2 = vertices[triangles[:, 2]] - vertices[triangles[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


@dataclass(frozen=True)
class MeshDensity:
    """Triangle mesh with a nonnegative per-vertex density.

    ``vertex_area`` is the barycentric lumped area (one third of each incident
    triangle) and is computed at construction.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    density: np.ndarray
    vertex_area: np.ndarray = field(init=False)

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] not in (2, 3):
            raise DimensionError("vertices must have shape (n, 3)")
        if V.shape[1] == 2:
            V = np.hstack([V, np.zeros((V.shape[0], 1))])
        T = np.asarray(self.triangles, dtype=np.int64)
        if T.ndim != 2 or T.shape[1] != 3:
            raise DimensionError("triangles must have shape (m, 3)")
        if T.size and (T.min() < 0 or T.max() >= V.shape[0]):
            raise MeasureError("triangle index out of range")
        if not np.all(np.isfinite(V)):
            raise MeasureError("vertices contain NaN or infinite entries")
        rho = np.asarray(self.density, dtype=float).ravel()
        if rho.shape[0] != V.shape[0]:
            raise DimensionError("need one density value per vertex")
        _check_values(rho, "vertex densities")
        areas = _triangle_areas(V, T)
        if np.any(areas <= 0):
            raise MeasureError("mesh has degenerate (zero-area) triangles")
        lumped = np.zeros(V.shape[0])
        for c in range(3):
            np.add.at(lumped, T[:, c], areas / 3.0)
        if np.any(lumped <= 0):
            raise MeasureError("mesh has unreferenced vertices")
        n = V.shape[0]
        rows = np.concatenate([T[:, 0], T[:, 1], T[:, 2]])
        cols = np.concatenate([T[:, 1], T[:, 2], T[:, 0]])
        adj = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            raise MeasureError(f"mesh must be connected, found {ncomp} components")
        object.__setattr__(self, "vertices", _frozen(V))
        T = np.ascontiguousarray(T)
        T.setflags(write=False)
        object.__setattr__(self, "triangles", T)
        object.__setattr__(self, "density", _frozen(rho))
        object.__setattr__(self, "vertex_area", _frozen(lumped))

    @property
    def mass(self) -> float:
        return float(self.density @ self.vertex_area)

    def masses(self) -> np.ndarray:
        return self.density * self.vertex_area

    def with_density(self, density) -> "MeshDensity":
        return MeshDensity(self.vertices, self.triangles, density)

    def diameter(self) -> float:
        V = self.vertices
        lo, hi = V.min(axis=0), V.max(axis=0)
        return float(np.linalg.norm(hi - lo))


@dataclass(frozen=True)
class CostMatrix:
    """Matrix of transport costs ``c_ij``, typically ``||x_i - y_j||^p``."""

    entries: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        C = np.asarray(self.entries, dtype=float)
        if C.ndim != 2:
            raise DimensionError("cost matrix must be 2D")
        if not np.all(np.isfinite(C)):
            raise MeasureError("cost matrix has non-finite entries")
        if np.any(C < 0):
            raise MeasureError("cost matrix must be nonnegative")
        object.__setattr__(self, "entries", _frozen(C))

    @property
    def shape(self) -> tuple:
        return self.entries.shape


@dataclass(frozen=True)
class TransportPlan:
    """Dense coupling matrix with its prescribed marginals and attained cost."""

    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    cost: float

    def __post_init__(self):
        for name in ("matrix", "row_marginal", "col_marginal"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "cost", float(self.cost))

    @classmethod
    def from_matrix(cls, T, v, w, C) -> "TransportPlan":
        T = np.asarray(T, dtype=float)
        C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=float)
        return cls(T, v, w, float(np.sum(T * C)))

    def triples(self, threshold: float = 0.0):
        """Coordinate-sparse view: arrays ``(i, j, mass)`` of entries above ``threshold``."""
        i, j = np.nonzero(self.matrix > threshold)
        return i, j, self.matrix[i, j]

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.matrix))

    def marginal_errors(self) -> tuple[float, float]:
        r = np.abs(self.matrix.sum(axis=1) - self.row_marginal).sum()
        c = np.abs(self.matrix.sum(axis=0) - self.col_marginal).sum()
        return float(r), float(c)


@dataclass(frozen=True)
class DualPotentials:
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen(self.phi))
        object.__setattr__(self, "psi", _frozen(self.psi))

    def objective(self, v, w) -> float:
        return float(self.phi @ np.asarray(v) + self.psi @ np.asarray(w))


@dataclass(frozen=True)
class InterpolationSequence:
    """Ordered frames ``rho(., t_k)`` of a displacement interpolation."""

    frames: tuple
    times: np.ndarray

    def __post_init__(self):
        frames = tuple(self.frames)
        t = np.asarray(self.times, dtype=float)
        if len(frames) != t.size or len(frames) < 2:
            raise MeasureError("need one time per frame and at least two frames")
        if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise MeasureError("times must increase from 0 to 1")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "times", _frozen(t))

    def __len__(self):
        return len(self.frames)

    def __getitem__(self, k) -> GridDensity:
        return self.frames[k]


def build_cost_matrix(src: DiscreteMeasure, dst: DiscreteMeasure, p: float = 2.0) -> CostMatrix:
    """Pairwise ``||x_i - y_j||_2 ** p`` between the atoms of two measures."""
    if not p > 0:
        raise MeasureError("cost exponent p must be positive")
    if src.dim != dst.dim:
        raise DimensionError(f"cannot compare a {src.dim}D measure with a {dst.dim}D one")
    diff = src.points[:, None, :] - dst.points[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    return CostMatrix(dist**p, p)


def normalize(measure):
    """Rescale a measure to unit total mass, preserving proportions."""
    mass = measure.mass
    if not mass > 0:
        raise ZeroMassError("cannot normalize a measure with zero total mass")
    if isinstance(measure, DiscreteMeasure):
        return DiscreteMeasure(measure.points, measure.weights / mass)
    if isinstance(measure, GridDensity):
        return GridDensity(measure.values / mass, measure.extent)
    if isinstance(measure, MeshDensity):
        return MeshDensity(measure.vertices, measure.triangles, measure.density / mass)
    raise TypeError(f"cannot normalize {type(measure).__name__}")


def require_normalized(measure, tol: float = 1e-8) -> None:
    if abs(measure.mass - 1.0) > tol:
        raise MeasureError(f"measure is not normalized (total mass {measure.mass:.12g})")


def grid_to_discrete(g: GridDensity) -> DiscreteMeasure:
    """One atom per nonzero cell, at the cell center, weighted by cell mass."""
    w = g.masses().ravel()
    keep = w > 0
    return DiscreteMeasure(g.cell_centers()[keep], w[keep])


def as_histogram(values: Sequence[float]) -> np.ndarray:
    h = np.asarray(values, dtype=float).ravel()
    _check_values(h, "histogram")
    return h
