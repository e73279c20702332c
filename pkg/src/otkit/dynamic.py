"""Eulerian transport on grids: Benamou-Brenier (W2) and Beckmann (W1).

Both problems are solved by the same augmented-Lagrangian splitting on the
dual potential ``phi``:

    min_{phi, q}  F(q) + G(phi)   subject to  q = D phi

where ``F`` is the indicator of a pointwise convex set, ``G`` holds the
boundary data and ``D`` is a discrete gradient.  Each sweep does a Poisson
solve for ``phi``, a pointwise projection for ``q`` and a multiplier update
for ``z = (rho, J)``.

Layout (dynamic problem, ``N`` time steps, ``tau = 1 / N``):

* ``phi`` lives on time nodes ``k = 0..N`` times grid cells;
* ``q = (a, b)`` and ``z = (rho, J)`` live on time centers ``k + 1/2``
  times grid cells.  ``a`` is the forward time difference of ``phi``; ``b``
  stacks, for every spatial axis, the half-weighted face differences on both
  faces of the cell at both neighbouring time nodes, so ``|b|^2`` averages
  the squared gradient.  Faces on the domain wall carry zero (no flux).

The Laplace operator ``D^T D`` is diagonalized by a cosine transform in
space (an FFT for the periodic variant) and solved by small dense inverses
in time, one per spatial mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .measures import DimensionError, GridDensity, InterpolationSequence

__all__ = [
    "SpaceTimeField",
    "DynamicReport",
    "project_paraboloid",
    "project_unit_ball",
    "continuity_residual",
    "solve_dynamic",
    "beckmann_w1",
    "BeckmannResult",
]


# -- pointwise projections ----------------------------------------------------

def project_paraboloid(a, b, newton_iters: int = 60):
    """Closest point to ``(a, b)`` in ``{(a, b) : a + |b|^2 / 2 <= 0}``.

    ``b`` may carry any number of trailing vector axes beyond the shape of
    ``a``.  Feasible points are returned unchanged.  Otherwise the multiplier
    ``mu = 1 + lambda`` is the root of ``mu^3 - (a + 1) mu^2 - |b|^2 / 2`` in
    ``[max(1, a + 1), max(1, a + 1) + |b|^2 / 2 + 1]``; the cubic is convex and
    increasing there, so Newton from the right end converges monotonically.
    Bisection takes over on any step that leaves the bracket.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    extra = tuple(range(a.ndim, b.ndim))
    beta = 0.5 * np.sum(b * b, axis=extra) if extra else 0.5 * b * b
    out_a = a.copy()
    out_b = b.copy()
    bad = a + beta > 0
    if not np.any(bad):
        return out_a, out_b
    ab, bb = a[bad], beta[bad]
    lo = np.maximum(1.0, ab + 1.0)
    hi = lo + bb + 1.0
    mu = hi.copy()
    for _ in range(newton_iters):
        f = mu * mu * (mu - ab - 1.0) - bb
        lo = np.where(f < 0, mu, lo)
        hi = np.where(f > 0, mu, hi)
        df = mu * (3.0 * mu - 2.0 * (ab + 1.0))
        step = np.where(df > 0, f / np.where(df > 0, df, 1.0), 0.0)
        nxt = mu - step
        outside = (nxt < lo) | (nxt > hi) | (df <= 0)
        nxt = np.where(outside, 0.5 * (lo + hi), nxt)
        done = (np.abs(nxt - mu) <= 1e-15 * mu) | (f == 0)
        mu = nxt
        if np.all(done):
            break
    out_a[bad] = ab - (mu - 1.0)
    scale = np.ones(a.shape)
    scale[bad] = 1.0 / mu
    out_b = b * scale.reshape(scale.shape + (1,) * len(extra))
    return out_a, out_b


def project_unit_ball(b, ndim: int):
    """Scale each vector (the trailing ``b.ndim - ndim`` axes) into the unit ball."""
    axes = tuple(range(ndim, b.ndim))
    nrm = np.sqrt(np.sum(b * b, axis=axes))
    s = 1.0 / np.maximum(nrm, 1.0)
    return b * s.reshape(s.shape + (1,) * len(axes))


# -- discrete gradient and its adjoint ----------------------------------------

def _face_samples(phi, h, periodic, out=None):
    """Per-cell (left, right) face differences for every spatial axis.

    Spatial axes are the trailing ``len(h)`` axes of ``phi``; the result has
    shape ``phi.shape + (d, 2)``.
    """
    d = len(h)
    lead = phi.ndim - d
    if out is None:
        out = np.zeros(phi.shape + (d, 2))
    for ax in range(d):
        axis = lead + ax
        left = np.moveaxis(out[..., ax, 0], axis, 0)
        right = np.moveaxis(out[..., ax, 1], axis, 0)
        p = np.moveaxis(phi, axis, 0)
        if periodic:
            fd = (np.roll(p, -1, axis=0) - p) / h[ax]
            right[...] = fd
            left[1:] = fd[:-1]
            left[0] = fd[-1]
        else:
            fd = (p[1:] - p[:-1]) / h[ax]
            right[:-1] = fd
            right[-1] = 0.0
            left[1:] = fd
            left[0] = 0.0
    return out


def _face_samples_T(Z, h, periodic):
    """Adjoint of :func:`_face_samples` for the plain (unweighted) inner product."""
    d = len(h)
    shape = Z.shape[:-2]
    lead = len(shape) - d
    out = np.zeros(shape)
    for ax in range(d):
        axis = lead + ax
        left = np.moveaxis(Z[..., ax, 0], axis, 0)
        right = np.moveaxis(Z[..., ax, 1], axis, 0)
        o = np.moveaxis(out, axis, 0)
        if periodic:
            Y = (right + np.roll(left, -1, axis=0)) / h[ax]
            o += np.roll(Y, 1, axis=0) - Y
        else:
            Y = (right[:-1] + left[1:]) / h[ax]
            o[:-1] -= Y
            o[1:] += Y
    return out


class _SpaceTimeOps:
    """``D``, ``D^T`` and ``(D^T D)^+`` for the dynamic layout."""

    def __init__(self, shape, h, nt, periodic=False, factor=True):
        self.shape = tuple(shape)
        self.h = tuple(float(x) for x in h)
        self.nt = nt
        self.tau = 1.0 / nt
        self.periodic = periodic
        self.d = len(self.shape)
        if not factor:
            return
        lam = self._spatial_eigs()
        n = nt + 1
        Lt = np.diag(np.r_[1.0, 2.0 * np.ones(n - 2), 1.0]) - np.eye(n, k=1) - np.eye(n, k=-1)
        nk = np.r_[1.0, 2.0 * np.ones(n - 2), 1.0]
        mats = Lt[None] / self.tau**2 + lam.ravel()[:, None, None] * np.diag(nk / 2.0)[None]
        zero = np.flatnonzero(lam.ravel() == 0.0)
        self.inv = np.empty_like(mats)
        nonzero = np.setdiff1d(np.arange(mats.shape[0]), zero)
        self.inv[nonzero] = np.linalg.inv(mats[nonzero])
        for m in zero:
            self.inv[m] = np.linalg.pinv(mats[m])

    def _spatial_eigs(self):
        grids = []
        for M, hh in zip(self.shape, self.h):
            k = np.arange(M)
            if self.periodic:
                grids.append((2.0 - 2.0 * np.cos(2.0 * np.pi * k / M)) / hh**2)
            else:
                grids.append((2.0 - 2.0 * np.cos(np.pi * k / M)) / hh**2)
        lam = grids[0]
        for g in grids[1:]:
            lam = lam[:, None] + g[None, :]
        lam = np.asarray(lam)
        lam[np.abs(lam) < 1e-14 * lam.max()] = 0.0
        return lam

    def D(self, phi):
        a = (phi[1:] - phi[:-1]) / self.tau
        S = _face_samples(phi, self.h, self.periodic)
        S *= 0.5
        b = np.empty((self.nt,) + self.shape + (self.d, 2, 2))
        b[..., 0, :] = S[:-1]
        b[..., 1, :] = S[1:]
        return a, b

    def DT(self, a, b):
        Z = np.zeros((self.nt + 1,) + self.shape + (self.d, 2))
        Z[:-1] = b[..., 0, :]
        Z[1:] += b[..., 1, :]
        Z *= 0.5
        out = _face_samples_T(Z, self.h, self.periodic)
        at = a / self.tau
        out[:-1] -= at
        out[1:] += at
        return out

    def solve(self, rhs):
        axes = tuple(range(1, 1 + self.d))
        n = self.nt + 1
        if self.periodic:
            R = sfft.fftn(rhs, axes=axes, norm="ortho").reshape(n, -1)
            P = np.einsum("mij,jm->im", self.inv, R.real) + 1j * np.einsum("mij,jm->im", self.inv, R.imag)
            return sfft.ifftn(P.reshape(rhs.shape), axes=axes, norm="ortho").real
        R = sfft.dctn(rhs, type=2, axes=axes, norm="ortho").reshape(n, -1)
        P = np.einsum("mij,jm->im", self.inv, R)
        return sfft.idctn(P.reshape(rhs.shape), type=2, axes=axes, norm="ortho")


# -- containers ---------------------------------------------------------------

@dataclass
class SpaceTimeField:
    """Fields of a dynamic solve on ``(nt + 1)`` time nodes by the spatial grid.

    ``rho`` and ``J`` (momentum samples) sit at the ``nt`` time centers;
    ``phi`` at the time nodes.  ``rho0`` and ``rho1`` are the boundary data.
    """

    phi: np.ndarray
    a: np.ndarray
    b: np.ndarray
    rho: np.ndarray
    J: np.ndarray
    rho0: np.ndarray
    rho1: np.ndarray
    spacing: tuple
    periodic: bool = False

    @property
    def nt(self) -> int:
        return self.rho.shape[0]

    @property
    def tau(self) -> float:
        return 1.0 / self.nt

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def node_density(self) -> np.ndarray:
        """Density at the time nodes: boundary data at the ends, center averages inside."""
        inner = 0.5 * (self.rho[:-1] + self.rho[1:])
        return np.concatenate([self.rho0[None], inner, self.rho1[None]])

    def kinetic_energy(self) -> float:
        """``1/2`` of the integral of ``|J|^2 / rho`` over space-time."""
        J2 = np.sum(self.J * self.J, axis=tuple(range(self.rho.ndim, self.J.ndim)))
        pos = self.rho > 1e-300
        w = self.tau * self.cell_volume
        return 0.5 * w * float(np.sum(J2[pos] / self.rho[pos]))

    def dual_value(self) -> float:
        return self.cell_volume * float(np.sum(self.phi[-1] * self.rho1) - np.sum(self.phi[0] * self.rho0))


@dataclass
class DynamicReport:
    iterations: int
    converged: bool
    stalled: bool
    primal_residual: float
    continuity_residual: float
    kinetic_energy: float
    dual_value: float
    frame_mass_error: float
    residuals: list = field(default_factory=list, repr=False)


def _continuity(ops, rho, J, rho0, rho1):
    R = -ops.DT(rho, J)
    R[0] -= rho0 / ops.tau
    R[-1] += rho1 / ops.tau
    return R


def continuity_residual(f: SpaceTimeField) -> float:
    """Discrete L1 norm of ``d rho / dt + div J`` at the time nodes.

    Uses backward/forward time differences of the center densities, with the
    boundary data standing in beyond both ends, and the divergence adjoint to
    the face-difference gradient.  Weighted by ``tau * cell volume``.
    """
    ops = _SpaceTimeOps(f.rho0.shape, f.spacing, f.nt, f.periodic, factor=False)
    R = _continuity(ops, f.rho, f.J, f.rho0, f.rho1)
    return float(f.tau * f.cell_volume * np.abs(R).sum())


# -- solvers ------------------------------------------------------------------

def _floor(g: GridDensity, floor: float) -> np.ndarray:
    vals = np.asarray(g.values, dtype=float)
    level = floor / float(np.prod([hi - lo for lo, hi in g.extent]))
    vals = np.maximum(vals, level)
    return vals / (vals.sum() * g.cell_volume)


def solve_dynamic(rho0: GridDensity, rho1: GridDensity, nt: int = 16, r: float = 1.0,
                  iters: int = 20000, tol: float = 1e-5, floor: float = 1e-7,
                  periodic: bool = False, stall_window: int = 500, adapt: bool = True,
                  adapt_every: int = 20, callback=None):
    """Displacement interpolation and ``W_2^2`` by the three-step cycle.

    Stops when both the constraint residual ``||D phi - q||`` (space-time L2)
    and :func:`continuity_residual` are at most ``tol``, when the best value
    of the larger of the two has not improved over the last ``stall_window``
    sweeps, or after ``iters`` sweeps.  ``r`` is the initial penalty; with ``adapt`` it is
    doubled or halved every ``adapt_every`` sweeps to keep the two residuals
    balanced.  Returns ``(sequence, w2sq, report, field)``; ``w2sq`` is
    twice the kinetic energy.
    """
    if rho0.shape != rho1.shape:
        raise DimensionError(f"grid shapes differ: {rho0.shape} vs {rho1.shape}")
    if rho0.dim > 2:
        raise DimensionError("dynamic solver supports 1D and 2D grids")
    if nt < 2:
        raise ValueError("need at least two time steps")
    if not r > 0:
        raise ValueError("r must be positive")
    h = tuple(float(x) for x in rho0.spacing)
    vol = float(np.prod(h))
    p0, p1 = _floor(rho0, floor), _floor(rho1, floor)
    ops = _SpaceTimeOps(rho0.shape, h, nt, periodic)
    tau = ops.tau
    w = tau * vol
    g = np.zeros((nt + 1,) + rho0.shape)
    g[0] = vol * p0
    g[-1] = -vol * p1
    tc = (np.arange(nt) + 0.5) / nt
    tcs = tc.reshape((-1,) + (1,) * rho0.dim)
    rho = (1 - tcs) * p0[None] + tcs * p1[None]
    J = np.zeros(rho.shape + (rho0.dim, 2, 2))
    qa = np.zeros(rho.shape)
    qb = np.zeros(J.shape)
    phi = np.zeros((nt + 1,) + rho0.shape)
    residuals = []
    stall_ref = []
    converged = stalled = False
    cont = np.inf
    it = 0
    while it < iters:
        rhs = ops.DT(qa - rho / r, qb - J / r) - g / (r * w)
        phi = ops.solve(rhs)
        da, db = ops.D(phi)
        qa, qb = project_paraboloid(da + rho / r, db + J / r)
        ra, rb = da - qa, db - qb
        rho = rho + r * ra
        J = J + r * rb
        it += 1
        res = float(np.sqrt(w * (np.sum(ra * ra) + np.sum(rb * rb))))
        cont = float(w * np.abs(_continuity(ops, rho, J, p0, p1)).sum())
        residuals.append(res)
        if callback is not None:
            callback(it, res, cont, r)
        if res <= tol and cont <= tol:
            converged = True
            break
        stall_ref.append(max(res, cont))
        if stall_window and it >= 2 * stall_window and it % stall_window == 0:
            recent = min(stall_ref[-stall_window:])
            before = min(stall_ref[:-stall_window])
            if recent >= before:
                stalled = True
                break
        if adapt and it % adapt_every == 0:
            # keep the constraint and continuity residuals within a factor of 10
            if res > 10.0 * cont:
                r *= 2.0
            elif cont > 10.0 * res:
                r /= 2.0
    fieldobj = SpaceTimeField(phi, qa, qb, rho, J, p0, p1, h, periodic)
    cont = continuity_residual(fieldobj)
    nodes = fieldobj.node_density()
    raw_mass = nodes.reshape(nt + 1, -1).sum(axis=1) * vol
    frames = []
    for k in range(nt + 1):
        vals = np.maximum(nodes[k], 0.0)
        frames.append(GridDensity(vals / (vals.sum() * vol), rho0.extent))
    seq = InterpolationSequence(frames, np.linspace(0.0, 1.0, nt + 1))
    ke = fieldobj.kinetic_energy()
    report = DynamicReport(
        iterations=it,
        converged=converged,
        stalled=stalled,
        primal_residual=residuals[-1] if residuals else np.inf,
        continuity_residual=cont,
        kinetic_energy=ke,
        dual_value=fieldobj.dual_value(),
        frame_mass_error=float(np.abs(raw_mass - 1.0).max()),
        residuals=residuals,
    )
    return seq, 2.0 * ke, report, fieldobj


@dataclass
class BeckmannResult:
    value: float
    flow: np.ndarray
    iterations: int
    converged: bool
    primal_residual: float
    divergence_residual: float
    dual_value: float
    residuals: list = field(default_factory=list, repr=False)


def _cell_flux(J, h, periodic):
    """Cell-centered flux from the half-sample layout.

    Each face carries ``(right sample of the cell below + left sample of the
    cell above) / sqrt(2)``; cells average their two faces, walls carry zero.
    """
    d = len(h)
    out = np.zeros(J.shape[:-2] + (d,))
    for ax in range(d):
        left = np.moveaxis(J[..., ax, 0], ax, 0)
        right = np.moveaxis(J[..., ax, 1], ax, 0)
        o = np.moveaxis(out[..., ax], ax, 0)
        if periodic:
            face = (right + np.roll(left, -1, axis=0)) / np.sqrt(2.0)
            o[...] = 0.5 * (face + np.roll(face, 1, axis=0))
        else:
            face = (right[:-1] + left[1:]) / np.sqrt(2.0)
            o[:-1] += 0.5 * face
            o[1:] += 0.5 * face
    return out


def beckmann_w1(rho0: GridDensity, rho1: GridDensity, r: float = 1.0, iters: int = 20000,
                tol: float = 1e-5, periodic: bool = False, adapt: bool = True, adapt_every: int = 20):
    """``W_1`` as the least total flux ``sum |J| * cellVolume`` moving ``rho0`` onto ``rho1``.

    Static version of the same splitting: ``q`` is projected onto the unit
    ball and the multiplier is the flux.  ``flow`` has shape
    ``grid.shape + (d,)``, cell-centered, pointing from ``rho0`` towards
    ``rho1`` (so ``div flow = rho0 - rho1`` up to the stopping tolerance).
    """
    if rho0.shape != rho1.shape:
        raise DimensionError(f"grid shapes differ: {rho0.shape} vs {rho1.shape}")
    h = tuple(float(x) for x in rho0.spacing)
    d = rho0.dim
    vol = float(np.prod(h))
    f = np.asarray(rho1.values, dtype=float) - np.asarray(rho0.values, dtype=float)
    f = f - f.mean()
    lam = _SpaceTimeOps(rho0.shape, h, 2, periodic, factor=False)._spatial_eigs()
    inv = np.where(lam > 0, 1.0 / np.where(lam > 0, lam, 1.0), 0.0)
    s2 = np.sqrt(2.0)
    axes = tuple(range(d))

    def D(phi):
        return _face_samples(phi, h, periodic) / s2

    def DT(b):
        return _face_samples_T(b, h, periodic) / s2

    def solve(rhs):
        if periodic:
            return sfft.ifftn(sfft.fftn(rhs, axes=axes, norm="ortho") * inv, axes=axes, norm="ortho").real
        return sfft.idctn(sfft.dctn(rhs, type=2, axes=axes, norm="ortho") * inv, type=2, axes=axes, norm="ortho")

    J = np.zeros(rho0.shape + (d, 2))
    q = np.zeros(J.shape)
    phi = np.zeros(rho0.shape)
    residuals = []
    converged = False
    it = 0
    div = np.inf
    while it < iters:
        phi = solve(DT(q - J / r) + f / r)
        dphi = D(phi)
        q = project_unit_ball(dphi + J / r, d)
        res_b = dphi - q
        J = J + r * res_b
        it += 1
        res = float(np.sqrt(vol * np.sum(res_b * res_b)))
        div = float(vol * np.abs(DT(J) - f).sum())
        residuals.append(res)
        if res <= tol and div <= tol:
            converged = True
            break
        if adapt and it % adapt_every == 0:
            if res > 10.0 * div:
                r *= 2.0
            elif div > 10.0 * res:
                r /= 2.0
    nrm = np.sqrt(np.sum(J * J, axis=(-2, -1)))
    value = vol * float(nrm.sum())
    dual = vol * float(np.sum(phi * f))
    return BeckmannResult(value, _cell_flux(J, h, periodic), it, converged, residuals[-1], div, dual, residuals)
