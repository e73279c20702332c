"""Exact discrete transport by the transportation simplex method."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvergenceError, InfeasibleMarginalsError, InvalidCostError
from .measures import CostMatrix, DualPotentials, TransportPlan

__all__ = ["LPInfo", "Certificate", "solve_lp", "verify_optimality", "emd"]

MARGINAL_SLACK = 1e-8


@dataclass(frozen=True)
class LPInfo:
    iterations: int
    basis_rows: np.ndarray
    basis_cols: np.ndarray
    duality_gap: float


@dataclass(frozen=True)
class Certificate:
    """Outcome of :func:`verify_optimality`; truthy iff no condition is violated."""

    violations: tuple = ()
    primal_residual: float = 0.0
    max_dual_violation: float = 0.0
    max_slackness_violation: float = 0.0
    duality_gap: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _entries(C):
    if isinstance(C, CostMatrix):
        return C.entries
    C = np.asarray(C, dtype=float)
    if C.ndim != 2:
        raise InvalidCostError("cost must be a 2D matrix")
    if not np.all(np.isfinite(C)):
        raise InvalidCostError("cost matrix has non-finite entries")
    if np.any(C < 0):
        raise InvalidCostError("cost matrix has negative entries")
    return C


def _prepare(v, w, C):
    v = np.array(v, dtype=float).ravel()
    w = np.array(w, dtype=float).ravel()
    C = _entries(C)
    if C.shape != (v.size, w.size):
        raise InvalidCostError(f"cost shape {C.shape} does not match marginals ({v.size}, {w.size})")
    for name, x in (("v", v), ("w", w)):
        if x.size == 0 or not np.all(np.isfinite(x)) or np.any(x < 0):
            raise InfeasibleMarginalsError(f"marginal {name} must be finite and nonnegative")
    if abs(v.sum() - w.sum()) > MARGINAL_SLACK:
        raise InfeasibleMarginalsError(
            f"marginal masses differ by {abs(v.sum() - w.sum()):.3g} (> {MARGINAL_SLACK:g})"
        )
    # push the round-off residual into the largest entry so both sums are 1
    v[np.argmax(v)] += 1.0 - v.sum()
    w[np.argmax(w)] += 1.0 - w.sum()
    return v, w, C


def solve_lp(v, w, C, maxiter: int = 1_000_000, return_info: bool = False):
    """Optimal plan and dual potentials of the discrete Kantorovich problem.

    The plan is a basic solution: at most ``k1 + k2 - 1`` nonzero entries.
    With ``return_info=True`` an :class:`LPInfo` is appended to the result.
    """
    v, w, Cm = _prepare(v, w, C)
    rows, cols, flows, u, psi, it, status = kernels.transport_simplex(v, w, Cm, 1e-12, maxiter)
    T = np.zeros(Cm.shape)
    np.add.at(T, (rows, cols), flows)
    plan = TransportPlan(T, v, w, float(flows @ Cm[rows, cols]))
    duals = DualPotentials(u, psi)
    if status != kernels.STATUS_OPTIMAL:
        raise ConvergenceError(f"simplex stopped after {it} pivots without optimality", (plan, duals))
    gap = abs(plan.cost - duals.objective(v, w))
    if return_info:
        return plan, duals, LPInfo(it, rows, cols, gap)
    return plan, duals


def verify_optimality(plan: TransportPlan, duals: DualPotentials, C, tol: float = 1e-9) -> Certificate:
    """Check primal feasibility, dual feasibility and complementary slackness."""
    C = _entries(C)
    T = plan.matrix
    violations = []
    r_err, c_err = plan.marginal_errors()
    primal = max(r_err, c_err)
    if primal > tol or np.any(T < -tol):
        violations.append("primal_infeasible")
    reduced = C - duals.phi[:, None] - duals.psi[None, :]
    dual_viol = float(max(0.0, -reduced.min()))
    if dual_viol > tol:
        violations.append("dual_infeasible")
    active = T > tol
    slack = float(np.abs(reduced[active]).max()) if active.any() else 0.0
    if slack > tol:
        violations.append("slackness_violated")
    gap = abs(float(np.sum(T * C)) - duals.objective(plan.row_marginal, plan.col_marginal))
    if gap > tol * (1.0 + abs(plan.cost)):
        violations.append("duality_gap")
    return Certificate(tuple(violations), primal, dual_viol, slack, gap)


def emd(v, w, C) -> float:
    """Earth mover's distance: optimal cost of :func:`solve_lp`."""
    plan, _ = solve_lp(v, w, C)
    return plan.cost
