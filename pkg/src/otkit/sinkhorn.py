"""Entropically regularized transport by Sinkhorn diagonal scaling.

The plan has the form ``T = diag(p) K diag(q)`` with ``K = exp(-C / alpha)``.
:func:`sinkhorn` iterates on ``p, q`` directly; :func:`sinkhorn_log_domain`
iterates on the potentials ``f = alpha log p`` and ``g = alpha log q`` with
log-sum-exp reductions so that tiny ``alpha`` does not underflow.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import InfeasibleMarginalsError, InvalidCostError, UnderflowError
from .measures import CostMatrix, TransportPlan

__all__ = [
    "SinkhornState",
    "sinkhorn",
    "sinkhorn_log_domain",
    "entropic_barycenter",
    "regularized_objective",
    "kl_objective",
    "gibbs_kernel",
]

# smallest admissible entry of K q or K^T p
POSITIVE_FLOOR = 1e-300


@dataclass
class SinkhornState:
    p: np.ndarray
    q: np.ndarray
    alpha: float
    iterations: int
    marginal_error: float
    converged: bool
    f: np.ndarray = None
    g: np.ndarray = None
    history: list = field(default_factory=list, repr=False)


def gibbs_kernel(C, alpha: float) -> np.ndarray:
    return np.exp(-np.asarray(C, dtype=float) / alpha)


def _xlogx(T):
    out = np.zeros_like(T)
    pos = T > 0
    out[pos] = T[pos] * np.log(T[pos])
    return out


def regularized_objective(T, C, alpha: float) -> float:
    """``<T, C> + alpha <T, log T>``."""
    return float(np.sum(T * C) + alpha * _xlogx(T).sum())


def kl_objective(T, K, alpha: float) -> float:
    """``alpha * sum T log(T / K)``, the same value written as a KL divergence to the kernel."""
    pos = T > 0
    return float(alpha * np.sum(T[pos] * (np.log(T[pos]) - np.log(K[pos]))))


def _inputs(v, w, C, alpha):
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    v = np.asarray(v, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=float)
    if C.shape != (v.size, w.size):
        raise InvalidCostError(f"cost shape {C.shape} does not match marginals ({v.size}, {w.size})")
    if not np.all(np.isfinite(C)):
        raise InvalidCostError("cost matrix has non-finite entries")
    if np.any(v < 0) or np.any(w < 0) or abs(v.sum() - w.sum()) > 1e-8:
        raise InfeasibleMarginalsError("marginals must be nonnegative with equal mass")
    return v, w, C


def _embed(state, T_sub, rows, cols, shape, v, w, C, alpha):
    """Reinsert removed zero rows/columns and assemble the return triple."""
    T = np.zeros(shape)
    T[np.ix_(rows, cols)] = T_sub
    p = np.zeros(shape[0])
    q = np.zeros(shape[1])
    p[rows] = state.p
    q[cols] = state.q
    state.p, state.q = p, q
    if state.f is not None:
        f = np.full(shape[0], -np.inf)
        g = np.full(shape[1], -np.inf)
        f[rows], g[cols] = state.f, state.g
        state.f, state.g = f, g
    plan = TransportPlan(T, v, w, float(np.sum(T * C)))
    return state, plan, (plan.cost, regularized_objective(T, C, alpha))


def sinkhorn(v, w, C, alpha: float, max_iter: int = 100_000, tol: float = 1e-9):
    """Plain Sinkhorn scaling.

    Returns ``(state, plan, (transport_cost, regularized_objective))``.
    Convergence is measured by the L1 row-marginal violation after each full
    sweep (columns are exact right after the ``q`` update).
    """
    v, w, C = _inputs(v, w, C, alpha)
    rows, cols = np.flatnonzero(v > 0), np.flatnonzero(w > 0)
    vs, ws, Cs = v[rows], w[cols], C[np.ix_(rows, cols)]
    K = gibbs_kernel(Cs, alpha)
    q = np.ones(ws.size)
    Kq = K @ q
    err = np.inf
    history = []
    it = 0
    converged = False
    while it < max_iter:
        if not np.all(Kq > POSITIVE_FLOOR):
            raise UnderflowError(
                f"K q underflowed at iteration {it} (alpha={alpha:g}); use sinkhorn_log_domain"
            )
        p = vs / Kq
        KTp = K.T @ p
        if not np.all(KTp > POSITIVE_FLOOR):
            raise UnderflowError(
                f"K^T p underflowed at iteration {it} (alpha={alpha:g}); use sinkhorn_log_domain"
            )
        q = ws / KTp
        Kq = K @ q
        it += 1
        err = float(np.abs(p * Kq - vs).sum())
        history.append(err)
        if err <= tol:
            converged = True
            break
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise UnderflowError(f"scalings overflowed (alpha={alpha:g}); use sinkhorn_log_domain")
    T = p[:, None] * K * q[None, :]
    state = SinkhornState(p, q, float(alpha), it, err, converged, history=history)
    return _embed(state, T, rows, cols, C.shape, v, w, C, alpha)


def sinkhorn_log_domain(v, w, C, alpha: float, max_iter: int = 100_000, tol: float = 1e-9):
    """Sinkhorn in the potentials ``f = alpha log p``, ``g = alpha log q``.

    Same fixed point and return values as :func:`sinkhorn`; ``state.p`` and
    ``state.q`` may under/overflow for small ``alpha`` while ``state.f`` and
    ``state.g`` stay finite.
    """
    v, w, C = _inputs(v, w, C, alpha)
    rows, cols = np.flatnonzero(v > 0), np.flatnonzero(w > 0)
    vs, ws, Cs = v[rows], w[cols], C[np.ix_(rows, cols)]
    logv, logw = np.log(vs), np.log(ws)
    S = -Cs / alpha
    g = np.zeros(ws.size)
    f = np.zeros(vs.size)
    history = []
    err = np.inf
    it = 0
    converged = False
    while it < max_iter:
        f = alpha * (logv - logsumexp(S + g[None, :] / alpha, axis=1))
        g = alpha * (logw - logsumexp(S + f[:, None] / alpha, axis=0))
        it += 1
        row = np.exp(logsumexp(S + f[:, None] / alpha + g[None, :] / alpha, axis=1))
        err = float(np.abs(row - vs).sum())
        history.append(err)
        if err <= tol:
            converged = True
            break
    T = np.exp(S + f[:, None] / alpha + g[None, :] / alpha)
    with np.errstate(over="ignore", under="ignore"):
        p, q = np.exp(f / alpha), np.exp(g / alpha)
    state = SinkhornState(p, q, float(alpha), it, err, converged, f=f, g=g, history=history)
    return _embed(state, T, rows, cols, C.shape, v, w, C, alpha)


def entropic_barycenter(measures, weights, C, alpha: float, iters: int = 5000,
                        tol: float = 1e-10, debiased: bool = True):
    """Regularized barycenter of histograms on a shared support.

    Iterated Bregman projections: one scaling pair per input, and the
    barycenter is the weighted geometric mean of the ``K^T a_k`` factors.
    With ``debiased=True`` an extra symmetric scaling ``d`` removes the
    entropic blur, so a barycenter of identical inputs returns that input.
    """
    mus = [np.asarray(m, dtype=float).ravel() for m in measures]
    lam = np.asarray(weights, dtype=float).ravel()
    if len(mus) == 0 or lam.size != len(mus):
        raise ValueError("need one weight per input measure")
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-10:
        raise ValueError("barycenter weights must lie on the simplex")
    k = mus[0].size
    if any(m.size != k for m in mus):
        raise ValueError("all inputs must share the same support")
    C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=float)
    K = gibbs_kernel(C, alpha)
    if not np.all(K.sum(axis=1) > POSITIVE_FLOOR):
        raise UnderflowError(f"kernel underflow at alpha={alpha:g}")
    b = [np.ones(k) for _ in mus]
    d = np.ones(k)
    bary = np.full(k, 1.0 / k)
    tiny = np.finfo(float).tiny
    for _ in range(iters):
        KTa = []
        for mu, bk in zip(mus, b):
            a = mu / np.maximum(K @ bk, tiny)
            KTa.append(np.maximum(K.T @ a, tiny))
        logb = sum(l * np.log(x) for l, x in zip(lam, KTa) if l > 0)
        new = np.exp(logb) * (d if debiased else 1.0)
        b = [new / x for x in KTa]
        if debiased:
            d = np.sqrt(d * new / np.maximum(K @ d, tiny))
        change = np.abs(new - bary).sum()
        bary = new
        if change <= tol:
            break
    return bary / bary.sum()
