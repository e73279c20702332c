"""Closed-form transport on the real line.

Two independent routes are provided: :func:`w1_cdf` integrates the gap
between cumulative distribution functions along ``x``, while
:func:`wp_quantile` integrates ``|Q0(s) - Q1(s)|^p`` over the quantile
variable ``s``.  Both are exact on their merged breakpoint sets, so they are
used as ground truth for every other solver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure, GridDensity, MeasureError

__all__ = [
    "UnsupportedDimensionError",
    "UnsupportedExponentError",
    "IntervalAssignment",
    "w1_cdf",
    "wp_quantile",
    "semidiscrete_1d",
]


class UnsupportedDimensionError(MeasureError):
    pass


class UnsupportedExponentError(MeasureError):
    pass


def _check_1d(mu):
    if mu.dim != 1:
        raise UnsupportedDimensionError(f"1D closed forms need 1D input, got {mu.dim}D")


def _quantile_pieces(mu):
    """Quantile function as linear pieces on ``[s_k, s_{k+1}]``.

    Returns ``(s, qlo, qhi)`` with ``len(s) == len(qlo) + 1``; on piece ``k``
    the quantile runs linearly from ``qlo[k]`` to ``qhi[k]``.  Atoms give
    flat pieces; grid cells give ramps across the cell.
    """
    _check_1d(mu)
    if isinstance(mu, DiscreteMeasure):
        x = mu.points[:, 0]
        order = np.argsort(x, kind="stable")
        x, m = x[order], mu.weights[order]
        keep = m > 0
        x, m = x[keep], m[keep]
        lo = hi = x
    elif isinstance(mu, GridDensity):
        edges = mu.axis_edges(0)
        m = mu.masses()
        keep = m > 0
        lo, hi, m = edges[:-1][keep], edges[1:][keep], m[keep]
    else:
        raise TypeError(f"unsupported measure type {type(mu).__name__}")
    s = np.concatenate([[0.0], np.cumsum(m)])
    s /= s[-1]
    return s, lo, hi


def _eval_pieces(pieces, s_grid):
    """Left/right values of the quantile on each merged interval."""
    s, lo, hi = pieces
    mid = 0.5 * (s_grid[:-1] + s_grid[1:])
    k = np.clip(np.searchsorted(s, mid, side="right") - 1, 0, lo.size - 1)
    width = s[k + 1] - s[k]
    slope = np.where(width > 0, (hi[k] - lo[k]) / np.where(width > 0, width, 1.0), 0.0)
    left = lo[k] + slope * (s_grid[:-1] - s[k])
    right = lo[k] + slope * (s_grid[1:] - s[k])
    return left, right


def _integrate_abs_power(d0, d1, width, p):
    """Exact integral of ``|linear|^p`` over intervals with endpoint values d0, d1."""
    out = np.empty_like(width)
    flat = np.abs(d1 - d0) <= 1e-15 * (1.0 + np.abs(d0) + np.abs(d1))
    out[flat] = np.abs(0.5 * (d0[flat] + d1[flat])) ** p * width[flat]
    sl = ~flat
    anti = lambda u: np.sign(u) * np.abs(u) ** (p + 1) / (p + 1)
    out[sl] = (anti(d1[sl]) - anti(d0[sl])) * width[sl] / (d1[sl] - d0[sl])
    return out


def wp_quantile(mu0, mu1, p: float = 2.0) -> float:
    """``W_p`` between 1D measures via the quantile (monotone) coupling."""
    if not p >= 1:
        raise UnsupportedExponentError("closed-form 1D transport needs p >= 1")
    q0, q1 = _quantile_pieces(mu0), _quantile_pieces(mu1)
    s = np.union1d(q0[0], q1[0])
    width = np.diff(s)
    keep = width > 0
    s_lo, s_hi = s[:-1][keep], s[1:][keep]
    grid = np.concatenate([s_lo, s_hi[-1:]])
    a0, a1 = _eval_pieces(q0, grid)
    b0, b1 = _eval_pieces(q1, grid)
    total = _integrate_abs_power(a0 - b0, a1 - b1, width[keep], p).sum()
    return float(max(total, 0.0) ** (1.0 / p))


def _cdf_limits(mu, x):
    """Right limit of the CDF at ``x[:-1]`` and left limit at ``x[1:]``."""
    if isinstance(mu, DiscreteMeasure):
        pos = mu.points[:, 0]
        order = np.argsort(pos, kind="stable")
        pos = pos[order]
        cum = np.concatenate([[0.0], np.cumsum(mu.weights[order])])
        cum /= cum[-1]
        right = cum[np.searchsorted(pos, x[:-1], side="right")]
        left = cum[np.searchsorted(pos, x[1:], side="left")]
        return right, left
    edges = mu.axis_edges(0)
    cum = np.concatenate([[0.0], np.cumsum(mu.masses())])
    cum /= cum[-1]
    F = np.interp(x, edges, cum)
    return F[:-1], F[1:]


def w1_cdf(mu0, mu1) -> float:
    """``W_1`` as the L1 distance between the two cumulative distribution functions."""
    _check_1d(mu0)
    _check_1d(mu1)
    pts = []
    for mu in (mu0, mu1):
        if isinstance(mu, DiscreteMeasure):
            pts.append(mu.points[:, 0])
        elif isinstance(mu, GridDensity):
            pts.append(mu.axis_edges(0))
        else:
            raise TypeError(f"unsupported measure type {type(mu).__name__}")
    x = np.unique(np.concatenate(pts))
    if x.size < 2:
        return 0.0
    f0r, f0l = _cdf_limits(mu0, x)
    f1r, f1l = _cdf_limits(mu1, x)
    return float(_integrate_abs_power(f0r - f1r, f0l - f1l, np.diff(x), 1.0).sum())


@dataclass(frozen=True)
class IntervalAssignment:
    """Target interval ``[lower[k], upper[k]]`` receiving the ``k``-th atom.

    Atoms are listed in ascending position; ``source_index[k]`` maps back to
    the atom's index in the input measure.
    """

    lower: np.ndarray
    upper: np.ndarray
    source_index: np.ndarray
    weights: np.ndarray

    def interval_masses(self, rho: GridDensity) -> np.ndarray:
        edges = rho.axis_edges(0)
        cum = np.concatenate([[0.0], np.cumsum(rho.masses())])
        return np.interp(self.upper, edges, cum) - np.interp(self.lower, edges, cum)


def semidiscrete_1d(mu0: DiscreteMeasure, rho1: GridDensity) -> IntervalAssignment:
    """Monotone assignment of atoms to consecutive target intervals.

    Atom ``k`` (in sorted order) receives ``[F^{-1}(S_{k-1}), F^{-1}(S_k)]``
    with ``S`` the cumulative atom weights; where the target CDF is flat the
    interval is taken tight around the target mass.
    """
    _check_1d(mu0)
    _check_1d(rho1)
    x = mu0.points[:, 0]
    order = np.argsort(x, kind="stable")
    a = mu0.weights[order]
    S = np.concatenate([[0.0], np.cumsum(a)])
    S /= S[-1]
    edges = rho1.axis_edges(0)
    G = np.concatenate([[0.0], np.cumsum(rho1.masses())])
    G /= G[-1]
    m = G.size - 1

    def inf_reaching(s):
        # inf {x : F(x) >= s}
        k = np.searchsorted(G, s, side="left")
        k = np.clip(k, 1, m)
        frac = (s - G[k - 1]) / np.where(G[k] > G[k - 1], G[k] - G[k - 1], 1.0)
        return np.where(s <= 0, edges[0], edges[k - 1] + np.clip(frac, 0, 1) * (edges[k] - edges[k - 1]))

    def sup_below(s):
        # sup {x : F(x) <= s}
        k = np.searchsorted(G, s, side="right") - 1
        k = np.clip(k, 0, m - 1)
        frac = (s - G[k]) / np.where(G[k + 1] > G[k], G[k + 1] - G[k], 1.0)
        return np.where(s >= 1, edges[-1], edges[k] + np.clip(frac, 0, 1) * (edges[k + 1] - edges[k]))

    lower = sup_below(S[:-1])
    upper = inf_reaching(S[1:])
    # zero-weight atoms collapse to a point
    lower = np.minimum(lower, upper)
    return IntervalAssignment(lower, upper, order, a)
