"""Semidiscrete transport to a piecewise-constant 2D density.

Cost is ``c(x, y) = |x - y|^2 / 2``.  For shifts ``phi`` the Laguerre cell of
site ``i`` is where ``c(x_i, y) - phi_i`` is smallest; the dual objective

    F(phi) = sum_i a_i phi_i + sum_i int_{cell i} rho(y) (c(x_i, y) - phi_i) dy

is concave with gradient ``a_i - mass(cell i)``.  Its maximum equals the
transport cost, so ``W_2^2 = 2 max F``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from . import kernels
from .measures import DiscreteMeasure, GridDensity, MeasureError

__all__ = [
    "PowerDiagram",
    "SemidiscreteResult",
    "build_power_diagram",
    "cell_masses",
    "objective_and_gradient",
    "solve_semidiscrete",
    "lloyd_stipple",
    "StippleResult",
]

log = logging.getLogger(__name__)


def _box(domain):
    if isinstance(domain, GridDensity):
        (x0, x1), (y0, y1) = domain.extent
        return float(x0), float(x1), float(y0), float(y1)
    x0, x1, y0, y1 = (float(v) for v in domain)
    if not (x1 > x0 and y1 > y0):
        raise MeasureError("domain rectangle must have positive width and height")
    return x0, x1, y0, y1


def _check_sites(sites):
    sites = np.ascontiguousarray(sites, dtype=float)
    if sites.ndim != 2 or sites.shape[1] != 2 or sites.shape[0] == 0:
        raise MeasureError("sites must be a nonempty (k, 2) array")
    if not np.all(np.isfinite(sites)):
        raise MeasureError("sites must be finite")
    if np.unique(sites, axis=0).shape[0] != sites.shape[0]:
        raise MeasureError("duplicate sites")
    return sites


@dataclass(frozen=True)
class PowerDiagram:
    """Laguerre cells of ``sites`` with shifts ``phi`` inside ``box``.

    ``cells[i]`` is a counterclockwise ``(n, 2)`` vertex array (empty when the
    cell is empty); ``edges[i][e]`` names what lies across the edge leaving
    vertex ``e``: another site index, or ``-1..-4`` for the box sides.
    """

    sites: np.ndarray
    phi: np.ndarray
    box: tuple
    cells: tuple
    edges: tuple

    @property
    def adjacency(self) -> set:
        pairs = set()
        for i, lab in enumerate(self.edges):
            for j in lab:
                if j >= 0:
                    pairs.add((min(i, j), max(i, j)))
        return pairs

    def areas(self) -> np.ndarray:
        return np.array([_shoelace(c) for c in self.cells])

    def locate(self, y) -> np.ndarray:
        """Index of the cell containing each query point (ties to the lowest index)."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        d = 0.5 * np.sum((y[:, None, :] - self.sites[None]) ** 2, axis=-1) - self.phi[None]
        return np.argmin(d, axis=1)


def _shoelace(P):
    if len(P) < 3:
        return 0.0
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def build_power_diagram(sites, phi, domain=(0.0, 1.0, 0.0, 1.0)) -> PowerDiagram:
    """Exact Laguerre cells by clipping the box against every power bisector."""
    sites = _check_sites(sites)
    phi = np.ascontiguousarray(phi, dtype=float).ravel()
    if phi.size != sites.shape[0]:
        raise MeasureError("need one shift per site")
    box = _box(domain)
    cells, edges = [], []
    for i in range(sites.shape[0]):
        xs, ys, lab = kernels.power_cell(sites, phi, i, box)
        if len(xs):
            cells.append(np.column_stack([np.asarray(xs) + sites[i, 0], np.asarray(ys) + sites[i, 1]]))
        else:
            cells.append(np.zeros((0, 2)))
        edges.append(tuple(int(v) for v in lab))
    return PowerDiagram(sites, phi, box, tuple(cells), tuple(edges))


def _grid_args(rho: GridDensity):
    if rho.dim != 2:
        raise MeasureError("semidiscrete transport needs a 2D density")
    lo = (float(rho.extent[0][0]), float(rho.extent[1][0]))
    return np.ascontiguousarray(rho.values, dtype=float), lo, tuple(float(h) for h in rho.spacing)


def cell_masses(diagram: PowerDiagram, rho: GridDensity) -> np.ndarray:
    """Integral of ``rho`` over each cell (exact for piecewise-constant ``rho``)."""
    values, lo, spacing = _grid_args(rho)
    out = np.zeros(len(diagram.cells))
    for i, P in enumerate(diagram.cells):
        if len(P):
            o = diagram.sites[i]
            out[i] = kernels.polygon_grid_moments(P[:, 0] - o[0], P[:, 1] - o[1], o[0], o[1], values, lo, spacing)[0]
    return out


class _Evaluator:
    """Caches the density arrays; one call = one pass over all cells."""

    def __init__(self, sites, a, rho: GridDensity):
        self.sites = _check_sites(sites)
        self.a = np.asarray(a, dtype=float).ravel()
        if self.a.size != self.sites.shape[0]:
            raise MeasureError("need one weight per site")
        self.values, self.lo, self.spacing = _grid_args(rho)
        self.box = _box(rho)

    def __call__(self, phi, hessian=False):
        mass, mx, my, m2, polys, facets = kernels.laguerre_cells(
            self.sites, phi, self.box, self.values, self.lo, self.spacing, hessian
        )
        F = float(self.a @ phi + 0.5 * m2.sum() - phi @ mass)
        grad = self.a - mass
        H = None
        if hessian:
            k = self.sites.shape[0]
            i = facets[:, 0].astype(np.int64)
            j = facets[:, 1].astype(np.int64)
            dist = np.linalg.norm(self.sites[i] - self.sites[j], axis=1)
            wgt = facets[:, 2] / dist
            off = sp.coo_matrix((np.r_[wgt, wgt], (np.r_[i, j], np.r_[j, i])), shape=(k, k)).tocsr()
            H = off - sp.diags(np.asarray(off.sum(axis=1)).ravel())
        return F, grad, mass, (mx, my), polys, H


def objective_and_gradient(sites, a, phi, rho: GridDensity):
    """``(F(phi), dF/dphi)`` with ``dF/dphi_i = a_i - mass(cell i)``."""
    ev = _Evaluator(sites, a, rho)
    F, g, *_ = ev(np.asarray(phi, dtype=float).ravel())
    return F, g


@dataclass
class SemidiscreteResult:
    phi: np.ndarray
    diagram: PowerDiagram
    w2sq: float
    objective: float
    masses: np.ndarray
    centroids: np.ndarray
    iterations: int
    converged: bool
    method: str
    grad_norm: float
    history: list = field(default_factory=list, repr=False)


def _newton_step(H, g):
    """Solve ``H d = -g`` on the complement of constants (``H`` is negative semidefinite)."""
    k = g.size
    if k == 1:
        return np.zeros(1)
    # pin the last potential: drop its row and column
    Hr = H[:-1, :-1].tocsc()
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            d = spsolve(-Hr, g[:-1])
        except (MatrixRankWarning, RuntimeError):
            return None
    if not np.all(np.isfinite(d)):
        return None
    d = np.r_[d, 0.0]
    return d - d.mean()


def solve_semidiscrete(sites, a, rho: GridDensity, method: str = "newton", tol: float = 1e-9,
                       max_iter: int = 200, phi0=None, max_ascent_iter: int = 20000):
    """Maximize ``F`` until ``max |grad| <= tol``.

    ``newton`` uses the facet-integral Hessian with step halving until every
    cell keeps at least ``eps0`` mass and the gradient norm shrinks; if that
    fails it falls back to ``ascent`` (gradient steps with Armijo
    backtracking) for the rest of the run.
    """
    if method not in ("newton", "ascent"):
        raise ValueError(f"unknown method {method!r}")
    ev = _Evaluator(sites, a, rho)
    a = ev.a
    if np.any(a <= 0):
        raise MeasureError("site weights must be strictly positive")
    if abs(a.sum() - rho.mass) > 1e-8:
        raise MeasureError("site weights and density must carry the same mass")
    k = a.size
    phi = np.zeros(k) if phi0 is None else np.asarray(phi0, dtype=float).copy()
    F, g, mass, cent, polys, H = ev(phi, hessian=(method == "newton"))
    if phi0 is not None and mass.min() <= 0:
        # a warm start with empty cells would make the Hessian singular
        phi = np.zeros(k)
        F, g, mass, cent, polys, H = ev(phi, hessian=(method == "newton"))
    eps0 = 0.5 * min(a.min(), mass.min()) if mass.min() > 0 else 0.5 * a.min()
    history = [float(np.abs(g).max())]
    it = 0
    mode = method
    step = 1.0
    while np.abs(g).max() > tol and it < (max_iter if mode == "newton" else max_ascent_iter):
        it += 1
        if mode == "newton":
            d = _newton_step(H, g)
            accepted = False
            if d is not None:
                s = 1.0
                gn = np.linalg.norm(g)
                for _ in range(40):
                    trial = phi + s * d
                    F2, g2, m2, c2, p2, H2 = ev(trial, hessian=True)
                    if m2.min() >= eps0 and np.linalg.norm(g2) <= (1 - 0.5 * s) * gn:
                        accepted = True
                        break
                    s *= 0.5
            if not accepted:
                log.info("damped Newton stalled at iteration %d; switching to gradient ascent", it)
                mode = "ascent"
                F, g, mass, cent, polys, H = ev(phi)
                continue
            phi, F, g, mass, cent, polys, H = trial, F2, g2, m2, c2, p2, H2
        else:
            gg = float(g @ g)
            while True:
                trial = phi + step * g
                F2, g2, m2, c2, p2, _ = ev(trial)
                if F2 >= F + 0.5 * step * gg or step < 1e-16:
                    break
                step *= 0.5
            phi, F, g, mass, cent, polys = trial, F2, g2, m2, c2, p2
            step *= 2.0
        history.append(float(np.abs(g).max()))
    converged = bool(np.abs(g).max() <= tol)
    phi = phi - phi.mean()
    diagram = build_power_diagram(ev.sites, phi, ev.box)
    mx, my = cent
    with np.errstate(invalid="ignore", divide="ignore"):
        centroids = ev.sites + np.column_stack([mx, my]) / mass[:, None]
    centroids[mass <= 0] = ev.sites[mass <= 0]
    return SemidiscreteResult(phi, diagram, 2.0 * F, F, mass, centroids, it, converged, mode,
                              float(np.abs(g).max()), history)


@dataclass
class StippleResult:
    points: DiscreteMeasure
    w2sq: list
    iterations: int
    max_move: float
    phi: np.ndarray


def _sample_sites(rho: GridDensity, n, rng):
    m = rho.masses().ravel()
    idx = rng.choice(m.size, size=n, replace=False if n <= np.count_nonzero(m) else True, p=m / m.sum())
    i, j = np.unravel_index(idx, rho.shape)
    (x0, _), (y0, _) = rho.extent
    hx, hy = rho.spacing
    u = rng.random((n, 2))
    return np.column_stack([x0 + (i + u[:, 0]) * hx, y0 + (j + u[:, 1]) * hy])


def lloyd_stipple(rho: GridDensity, n: int, outer_iters: int = 30, inner_tol: float = 1e-12,
                  move_tol: float = 1e-6, seed: int = 0, method: str = "newton", sites=None):
    """Blue-noise stippling: ``n`` equal-weight points minimizing ``W_2^2`` to ``rho``.

    Alternates an exact semidiscrete solve (weights ``1/n``) with moving
    every site to the ``rho``-centroid of its cell.  Stops after
    ``outer_iters`` rounds or once no site moves more than ``move_tol``.
    """
    if n < 1:
        raise ValueError("need at least one point")
    rng = np.random.default_rng(seed)
    x = _sample_sites(rho, n, rng) if sites is None else np.array(sites, dtype=float)
    a = np.full(n, rho.mass / n)
    phi = None
    w2 = []
    move = np.inf
    it = 0
    for it in range(1, outer_iters + 1):
        res = solve_semidiscrete(x, a, rho, method=method, tol=inner_tol, phi0=phi)
        w2.append(res.w2sq)
        new = res.centroids
        move = float(np.max(np.linalg.norm(new - x, axis=1)))
        x = new
        phi = res.phi
        if move <= move_tol:
            break
    final = solve_semidiscrete(x, a, rho, method=method, tol=inner_tol, phi0=phi)
    w2.append(final.w2sq)
    return StippleResult(DiscreteMeasure(x, a / a.sum()), w2, it, move, final.phi)
