"""``ot``: command-line front end.

Exit codes: 0 converged, 1 usage or input error, 2 numerical non-convergence
(a partial result is still printed).  Option defaults can be overridden by
``OT_<NAME>`` environment variables (for example ``OT_ALPHA``, ``OT_THREADS``);
explicit flags always win.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io as otio
from .dynamic import beckmann_w1, solve_dynamic
from .errors import ConvergenceError, GeometryError, InfeasibleMarginalsError, InvalidCostError, UnderflowError
from .heat import HeatOperator, convolutional_barycenter, convolutional_sinkhorn
from .lp import solve_lp, verify_optimality
from .measures import (
    DiscreteMeasure,
    GridDensity,
    MeasureError,
    MeshDensity,
    build_cost_matrix,
    grid_to_discrete,
    normalize,
)
from .oracle1d import w1_cdf, wp_quantile
from .semidiscrete import lloyd_stipple, solve_semidiscrete
from .sinkhorn import entropic_barycenter, sinkhorn, sinkhorn_log_domain

METHODS = ("lp", "cdf1d", "sinkhorn", "conv", "dynamic", "beckmann")
# largest cost matrix the dense solvers accept inside ``compare``
DENSE_LIMIT = 250_000
SIG_DIGITS = 12


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env(name, default, cast=str):
    raw = os.environ.get("OT_" + name.upper())
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"environment variable OT_{name.upper()}={raw!r} is not a valid {cast.__name__}") from None


def _round(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not math.isfinite(x) else float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist())
    return x


def _emit(payload, as_json, out=None):
    out = sys.stdout if out is None else out
    payload = _round(payload)
    if as_json:
        out.write(json.dumps(payload, sort_keys=True) + "\n")
        return
    for key, val in payload.items():
        if isinstance(val, dict):
            out.write(f"{key}:\n")
            for k, v in val.items():
                out.write(f"  {k}: {_fmt(v)}\n")
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            out.write(f"{key}:\n")
            for row in val:
                out.write("  " + "  ".join(f"{k}={_fmt(v)}" for k, v in row.items()) + "\n")
        else:
            out.write(f"{key}: {_fmt(val)}\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def _load(path, flag):
    if path is None:
        raise UsageError(f"missing required argument {flag}")
    try:
        return otio.load_measure(path)
    except FileNotFoundError:
        raise UsageError(f"{flag}: no such file {path!r}") from None
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise UsageError(f"{flag}: cannot read {path!r}: {exc}") from None


def _as_discrete(mu):
    if isinstance(mu, DiscreteMeasure):
        return normalize(mu)
    if isinstance(mu, GridDensity):
        return grid_to_discrete(normalize(mu))
    raise MeasureError(f"{type(mu).__name__} inputs are not supported by this method")


def _pair_check(a, b, method):
    """Raise UsageError (naming --b) when the pair cannot be fed to ``method``."""
    if method in ("lp", "sinkhorn"):
        for flag, mu in (("--a", a), ("--b", b)):
            if isinstance(mu, MeshDensity):
                raise UsageError(f"{flag}: method {method} needs point clouds or grids, not meshes")
        if _dim(a) != _dim(b):
            raise UsageError(f"--b: dimension {_dim(b)} does not match --a dimension {_dim(a)}")
    elif method == "cdf1d":
        for flag, mu in (("--a", a), ("--b", b)):
            if isinstance(mu, MeshDensity) or _dim(mu) != 1:
                raise UsageError(f"{flag}: method cdf1d needs 1D input")
    elif method in ("dynamic", "beckmann", "conv"):
        if method == "conv" and isinstance(a, MeshDensity) and isinstance(b, MeshDensity):
            if a.vertices.shape != b.vertices.shape or not np.array_equal(a.triangles, b.triangles):
                raise UsageError("--b: mesh differs from --a")
            return
        for flag, mu in (("--a", a), ("--b", b)):
            if not isinstance(mu, GridDensity):
                raise UsageError(f"{flag}: method {method} needs a grid density (.csv or .pgm)")
        if a.shape != b.shape or a.extent != b.extent:
            raise UsageError(f"--b: grid {b.shape} on {b.extent} does not match --a grid {a.shape} on {a.extent}")


def _dim(mu):
    return mu.dim if not isinstance(mu, MeshDensity) else 3


def _solve(method, a, b, opts):
    """Run one method; returns (value, converged, diagnostics).

    ``value`` is the optimal transport cost for ``|x - y|^p``, i.e. ``W_p^p``.
    """
    p = opts.p
    if method in ("conv", "dynamic") and p != 2:
        raise UsageError(f"--p: method {method} computes W_2 only (got --p {p:g})")
    if method == "beckmann" and p != 1:
        raise UsageError(f"--p: method beckmann computes W_1 only (got --p {p:g})")
    if method == "cdf1d":
        if p == 1:
            return w1_cdf(_as_discrete(a), _as_discrete(b)), True, {"route": "cdf"}
        return wp_quantile(_as_discrete(a), _as_discrete(b), p) ** p, True, {"route": "quantile"}
    if method in ("lp", "sinkhorn"):
        da, db = _as_discrete(a), _as_discrete(b)
        C = build_cost_matrix(da, db, p)
        if method == "lp":
            try:
                plan, duals, info = solve_lp(da.weights, db.weights, C, return_info=True)
            except ConvergenceError as exc:
                part = exc.partial
                value = float(part[0].cost) if part else float("nan")
                return value, False, {"error": str(exc)}
            cert = verify_optimality(plan, duals, C)
            diag = {"iterations": info.iterations, "duality_gap": cert.duality_gap,
                    "primal_residual": cert.primal_residual, "certified": bool(cert)}
            return plan.cost, bool(cert), diag
        alpha = opts.alpha
        if opts.relative_alpha:
            alpha *= float(C.entries.max()) or 1.0
        variant = "plain"
        try:
            if opts.log_domain:
                raise UnderflowError("log domain requested")
            state, plan, (cost, reg) = sinkhorn(da.weights, db.weights, C, alpha, opts.iters, opts.tol)
        except UnderflowError:
            variant = "log"
            state, plan, (cost, reg) = sinkhorn_log_domain(da.weights, db.weights, C, alpha, opts.iters, opts.tol)
        diag = {"iterations": state.iterations, "marginal_error": state.marginal_error,
                "alpha": alpha, "variant": variant, "regularized_objective": reg}
        return cost, state.converged, diag
    if method == "conv":
        if isinstance(a, MeshDensity):
            diam2 = a.diameter() ** 2
            alpha = opts.alpha * diam2 if opts.relative_alpha else opts.alpha
            op = HeatOperator.for_mesh(a, alpha)
        else:
            a, b = normalize(a), normalize(b)
            diam2 = float(sum((hi - lo) ** 2 for lo, hi in a.extent))
            alpha = opts.alpha * diam2 if opts.relative_alpha else opts.alpha
            op = HeatOperator.for_grid(a, alpha)
        res = convolutional_sinkhorn(a, b, op, opts.iters, opts.tol)
        diag = {"iterations": res.iterations, "marginal_error": res.marginal_error, "alpha": alpha,
                "regularized_objective": res.objective}
        return res.cost, res.converged, diag
    a, b = normalize(a), normalize(b)
    if method == "dynamic":
        _, w2sq, rep, _ = solve_dynamic(a, b, nt=opts.nt, iters=opts.iters, tol=opts.dyn_tol)
        diag = {"iterations": rep.iterations, "primal_residual": rep.primal_residual,
                "continuity_residual": rep.continuity_residual, "dual_value": 2.0 * rep.dual_value,
                "frame_mass_error": rep.frame_mass_error, "stalled": rep.stalled}
        return w2sq, rep.converged, diag
    if method == "beckmann":
        res = beckmann_w1(a, b, iters=opts.iters, tol=opts.dyn_tol)
        diag = {"iterations": res.iterations, "primal_residual": res.primal_residual,
                "divergence_residual": res.divergence_residual, "dual_value": res.dual_value}
        return res.value, res.converged, diag
    raise UsageError(f"--method: unknown method {method!r}")


def _result(method, value, converged, diag, p, elapsed):
    dist = value ** (1.0 / p) if value >= 0 else float("nan")
    return {"method": method, "value": value, "distance": dist, "p": p,
            "converged": converged, "seconds": elapsed, "diagnostics": diag}


def cmd_dist(args):
    if args.method not in METHODS:
        raise UsageError(f"--method: unknown method {args.method!r} (choose from {', '.join(METHODS)})")
    a, b = _load(args.a, "--a"), _load(args.b, "--b")
    _pair_check(a, b, args.method)
    t0 = time.perf_counter()
    value, ok, diag = _solve(args.method, a, b, args)
    _emit(_result(args.method, value, ok, diag, args.p, time.perf_counter() - t0), args.json)
    return 0 if ok else 2


def _applicable(a, b, p):
    out = []
    one_d = all(not isinstance(m, MeshDensity) and m.dim == 1 for m in (a, b))
    dense = all(isinstance(m, (DiscreteMeasure, GridDensity)) for m in (a, b)) and _dim(a) == _dim(b)
    if one_d and p >= 1:
        out.append("cdf1d")
    if dense:
        na = a.size if isinstance(a, DiscreteMeasure) else int(np.count_nonzero(a.values))
        nb = b.size if isinstance(b, DiscreteMeasure) else int(np.count_nonzero(b.values))
        if na * nb <= DENSE_LIMIT:
            out += ["lp", "sinkhorn"]
    grids = all(isinstance(m, GridDensity) for m in (a, b)) and a.shape == b.shape and a.extent == b.extent
    meshes = all(isinstance(m, MeshDensity) for m in (a, b))
    if p == 2 and (grids or meshes):
        out.append("conv")
    if grids and p == 2:
        out.append("dynamic")
    if grids and p == 1:
        out.append("beckmann")
    return out


def cmd_compare(args):
    a, b = _load(args.a, "--a"), _load(args.b, "--b")
    methods = _applicable(a, b, args.p)
    if args.methods:
        wanted = [m.strip() for m in args.methods.split(",") if m.strip()]
        bad = [m for m in wanted if m not in METHODS]
        if bad:
            raise UsageError(f"--methods: unknown method(s) {', '.join(bad)}")
        methods = [m for m in methods if m in wanted]
    if len(methods) < 2:
        raise UsageError(f"--a/--b: fewer than 2 applicable methods for this instance ({', '.join(methods) or 'none'})")
    rows, all_ok = [], True
    for m in methods:
        t0 = time.perf_counter()
        value, ok, diag = _solve(m, a, b, args)
        all_ok &= bool(ok)
        resid = next((diag[k] for k in ("duality_gap", "marginal_error", "continuity_residual", "divergence_residual") if k in diag), 0.0)
        rows.append({"method": m, "value": value, "seconds": time.perf_counter() - t0,
                     "iterations": diag.get("iterations", 0), "residual": resid, "converged": bool(ok)})
    dev = {}
    for i, r in enumerate(rows):
        for s in rows[i + 1:]:
            scale = max(abs(r["value"]), abs(s["value"]))
            dev[f"{r['method']}-{s['method']}"] = abs(r["value"] - s["value"]) / scale if scale > 0 else 0.0
    _emit({"p": args.p, "methods": rows, "relative_deviation": dev}, args.json)
    return 0 if all_ok else 2


def cmd_plan(args):
    if args.method != "lp":
        raise UsageError(f"--method: plans are exported for lp only (got {args.method!r})")
    a, b = _load(args.a, "--a"), _load(args.b, "--b")
    _pair_check(a, b, "lp")
    da, db = _as_discrete(a), _as_discrete(b)
    C = build_cost_matrix(da, db, args.p)
    try:
        plan, duals = solve_lp(da.weights, db.weights, C)
    except ConvergenceError as exc:
        if exc.partial:
            otio.write_plan_csv(args.out, exc.partial[0])
        raise
    otio.write_plan_csv(args.out, plan)
    cert = verify_optimality(plan, duals, C)
    _emit({"out": str(args.out), "cost": plan.cost, "nnz": plan.nnz, "certified": bool(cert),
           "duality_gap": cert.duality_gap}, args.json)
    return 0 if cert else 2


def _write_grid(path, grid):
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        otio.write_pgm(path, grid)
    elif suffix == ".csv":
        otio.write_grid_csv(path, grid)
    else:
        raise UsageError(f"--out: unsupported grid output type {suffix!r} (use .csv or .pgm)")


def cmd_interpolate(args):
    a, b = _load(args.a, "--a"), _load(args.b, "--b")
    _pair_check(a, b, "dynamic")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seq, w2sq, rep, _ = solve_dynamic(normalize(a), normalize(b), nt=args.nt, r=args.r, iters=args.iters,
                                      tol=args.dyn_tol)
    files = []
    for k, frame in enumerate(seq.frames):
        name = out / f"frame_{k:04d}.{args.format}"
        _write_grid(name, frame)
        files.append(name.name)
    report = {"w2sq": w2sq, "iterations": rep.iterations, "converged": rep.converged,
              "continuity_residual": rep.continuity_residual, "primal_residual": rep.primal_residual,
              "frame_mass_error": rep.frame_mass_error, "times": list(seq.times), "frames": files}
    (out / "report.json").write_text(json.dumps(_round(report), sort_keys=True, indent=1))
    _emit(report, args.json)
    return 0 if rep.converged else 2


def _parse_weights(text, n):
    try:
        lam = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"--weights: cannot parse {text!r}") from None
    if lam.size != n:
        raise UsageError(f"--weights: got {lam.size} weights for {n} inputs")
    if np.any(lam < 0) or lam.sum() <= 0:
        raise UsageError("--weights: weights must be nonnegative and not all zero")
    return lam / lam.sum()


def cmd_barycenter(args):
    mus = [_load(p, "--inputs") for p in args.inputs]
    if len(mus) < 1:
        raise UsageError("--inputs: need at least one input")
    lam = _parse_weights(args.weights, len(mus)) if args.weights else np.full(len(mus), 1.0 / len(mus))
    first = mus[0]
    if not isinstance(first, GridDensity) or any(
            not isinstance(m, GridDensity) or m.shape != first.shape or m.extent != first.extent for m in mus):
        raise UsageError("--inputs: barycenters need grid densities on one common grid")
    mus = [normalize(m) for m in mus]
    alpha = args.alpha
    if args.method == "conv":
        if args.relative_alpha:
            alpha *= float(sum((hi - lo) ** 2 for lo, hi in first.extent))
        op = HeatOperator.for_grid(first, alpha)
        dens = convolutional_barycenter(mus, lam, op, iters=args.iters, tol=args.tol)
        bary = first.with_values(dens)
    else:
        pts = first.cell_centers()
        X = DiscreteMeasure(pts, np.full(len(pts), 1.0 / len(pts)))
        C = build_cost_matrix(X, X, 2.0)
        if args.relative_alpha:
            alpha *= float(C.entries.max())
        hist = entropic_barycenter([m.masses().ravel() for m in mus], lam, C, alpha, iters=args.iters, tol=args.tol)
        bary = first.with_values(hist.reshape(first.shape) / first.cell_volume)
    bary = normalize(bary)
    _write_grid(args.out, bary)
    _emit({"out": str(args.out), "method": args.method, "alpha": alpha, "weights": lam.tolist()}, args.json)
    return 0


def _svg(points, box, path, radius=0.004):
    x0, x1, y0, y1 = box
    size = 512.0
    sx, sy = size / (x1 - x0), size / (y1 - y0)
    dots = "".join(
        f'<circle cx="{(px - x0) * sx:.3f}" cy="{(y1 - py) * sy:.3f}" r="{radius * size:.3f}"/>'
        for px, py in points
    )
    Path(path).write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:g}" height="{size:g}" '
        f'viewBox="0 0 {size:g} {size:g}"><rect width="100%" height="100%" fill="white"/>'
        f'<g fill="black">{dots}</g></svg>\n'
    )


def _density_arg(args):
    rho = _load(args.density, "--density")
    if not isinstance(rho, GridDensity) or rho.dim != 2:
        raise UsageError("--density: need a 2D grid density (.pgm or .csv)")
    return normalize(rho)


def cmd_stipple(args):
    rho = _density_arg(args)
    if args.n < 1:
        raise UsageError("--n: need at least one point")
    res = lloyd_stipple(rho, args.n, outer_iters=args.iters, seed=args.seed)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    otio.write_discrete(prefix.with_suffix(".json"), res.points)
    (x0, x1), (y0, y1) = rho.extent
    _svg(res.points.points, (x0, x1, y0, y1), prefix.with_suffix(".svg"))
    hist = res.w2sq
    monotone = bool(np.all(np.diff(hist) <= 1e-10))
    _emit({"n": args.n, "seed": args.seed, "iterations": res.iterations, "w2sq": hist[-1],
           "w2sq_history": hist, "monotone": monotone, "points": str(prefix.with_suffix(".json")),
           "svg": str(prefix.with_suffix(".svg"))}, args.json)
    return 0


def cmd_semidiscrete(args):
    rho = _density_arg(args)
    sites = _load(args.sites, "--sites")
    if not isinstance(sites, DiscreteMeasure) or sites.dim != 2:
        raise UsageError("--sites: need a 2D point cloud JSON file")
    res = solve_semidiscrete(sites.points, sites.weights / sites.weights.sum(), rho, method=args.method, tol=args.tol)
    features = [
        {"type": "Feature", "properties": {"site": i, "phi": float(res.phi[i]), "mass": float(res.masses[i])},
         "geometry": {"type": "Polygon",
                      "coordinates": [np.vstack([c, c[:1]]).tolist()] if len(c) else []}}
        for i, c in enumerate(res.diagram.cells)
    ]
    payload = {"w2sq": res.w2sq, "converged": res.converged, "iterations": res.iterations,
               "method": res.method, "grad_norm": res.grad_norm, "phi": res.phi.tolist(),
               "masses": res.masses.tolist(), "cells": {"type": "FeatureCollection", "features": features}}
    if args.out:
        Path(args.out).write_text(json.dumps(_round(payload)))
    _emit(payload if args.json else {k: v for k, v in payload.items() if k != "cells"}, args.json)
    return 0 if res.converged else 2


def _threads(n):
    if n is None or n <= 0:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=n)


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=_env("threads", 1, int),
                        help="BLAS/OpenMP thread cap (env OT_THREADS, default 1)")

    solver = _Parser(add_help=False)
    solver.add_argument("--p", type=float, default=_env("p", 2.0, float), help="cost exponent (env OT_P)")
    solver.add_argument("--alpha", type=float, default=_env("alpha", 0.01, float),
                        help="regularization for sinkhorn/conv (env OT_ALPHA)")
    solver.add_argument("--relative-alpha", action="store_true",
                        help="scale --alpha by max cost (sinkhorn) or squared domain diameter (conv)")
    solver.add_argument("--log-domain", action="store_true", help="force log-domain sinkhorn")
    solver.add_argument("--tol", type=float, default=_env("tol", 1e-9, float),
                        help="marginal tolerance for scaling methods (env OT_TOL)")
    solver.add_argument("--dyn-tol", type=float, default=_env("dyn_tol", 1e-4, float),
                        help="residual tolerance for dynamic/beckmann (env OT_DYN_TOL)")
    solver.add_argument("--iters", type=int, default=_env("iters", 20000, int), help="iteration cap (env OT_ITERS)")
    solver.add_argument("--nt", type=int, default=_env("nt", 16, int), help="time steps for dynamic (env OT_NT)")

    pair = _Parser(add_help=False)
    pair.add_argument("--a", required=True, help="source measure (.json, .csv, .pgm, .off)")
    pair.add_argument("--b", required=True, help="target measure")

    p = _Parser(prog="ot", description="Optimal transport toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", parents=[common, solver, pair], help="distance between two measures")
    d.add_argument("--method", required=True, help="one of " + ", ".join(METHODS))
    d.set_defaults(func=cmd_dist)

    pl = sub.add_parser("plan", parents=[common, solver, pair], help="export an optimal plan as i,j,mass CSV")
    pl.add_argument("--method", default="lp", help="only lp")
    pl.add_argument("--out", required=True, help="output CSV")
    pl.set_defaults(func=cmd_plan)

    c = sub.add_parser("compare", parents=[common, solver, pair], help="run every applicable method")
    c.add_argument("--methods", help="comma-separated subset of methods")
    c.set_defaults(func=cmd_compare)

    i = sub.add_parser("interpolate", parents=[common, solver, pair], help="displacement interpolation frames")
    i.add_argument("--frames", dest="nt", type=int, help="alias of --nt")
    i.add_argument("--r", type=float, default=_env("r", 1.0, float), help="initial penalty (env OT_R)")
    i.add_argument("--out", required=True, help="output directory")
    i.add_argument("--format", choices=("pgm", "csv"), default="pgm")
    i.set_defaults(func=cmd_interpolate)

    b = sub.add_parser("barycenter", parents=[common, solver], help="barycenter of grid densities")
    b.add_argument("--inputs", nargs="+", required=True, help="input grid densities")
    b.add_argument("--weights", help="comma-separated barycentric weights")
    b.add_argument("--method", choices=("sinkhorn", "conv"), default="conv")
    b.add_argument("--out", required=True, help="output .csv or .pgm")
    b.set_defaults(func=cmd_barycenter, tol=1e-10, iters=5000)

    s = sub.add_parser("stipple", parents=[common], help="blue-noise points for a density")
    s.add_argument("--density", required=True)
    s.add_argument("--n", type=int, required=True, help="number of points")
    s.add_argument("--seed", type=int, default=_env("seed", 0, int), help="sampling seed (env OT_SEED)")
    s.add_argument("--iters", type=int, default=_env("lloyd_iters", 30, int), help="Lloyd rounds (env OT_LLOYD_ITERS)")
    s.add_argument("--out", default="stipple", help="output prefix for .json and .svg")
    s.set_defaults(func=cmd_stipple)

    m = sub.add_parser("semidiscrete", parents=[common], help="semidiscrete transport to a 2D density")
    m.add_argument("--sites", required=True, help="point cloud JSON; weights give target masses")
    m.add_argument("--density", required=True)
    m.add_argument("--method", choices=("newton", "ascent"), default="newton")
    m.add_argument("--tol", type=float, default=_env("sd_tol", 1e-9, float), help="gradient tolerance (env OT_SD_TOL)")
    m.add_argument("--out", help="write the full JSON (with cells) here")
    m.set_defaults(func=cmd_semidiscrete)
    return p


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        with _threads(args.threads):
            return args.func(args)
    except UsageError as exc:
        print(f"ot: error: {exc}", file=sys.stderr)
        return 1
    except (MeasureError, InfeasibleMarginalsError, InvalidCostError, GeometryError) as exc:
        print(f"ot: input error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, UnderflowError, ArithmeticError) as exc:
        print(f"ot: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
