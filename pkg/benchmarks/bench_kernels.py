"""Time the compiled and pure-Python kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints one row per (kernel, size) with the best-of-N wall time for each
backend and the speedup. Both backends must agree on the result; a mismatch
aborts the run.
"""
import argparse
import time

import numpy as np

from otkit.kernels import get_backend


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def simplex_case(k, rng):
    v = rng.random(k) + 1e-3
    w = rng.random(k) + 1e-3
    C = rng.random((k, k))
    return (v / v.sum(), w / w.sum(), C, 1e-12, 1_000_000)


def laguerre_case(k, rng):
    sites = rng.random((k, 2))
    phi = rng.normal(scale=1e-3, size=k)
    values = rng.random((128, 128)) + 0.1
    values /= values.sum() / 128**2
    return (sites, phi, (0.0, 1.0, 0.0, 1.0), values, (0.0, 0.0), (1 / 128, 1 / 128), True)


def simplex_cost(out, args):
    rows, cols, flows = out[:3]
    return float(np.sum(flows * args[2][rows, cols]))


def laguerre_mass(out, args):
    return np.asarray(out[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    py, cy = get_backend("python"), get_backend("cython")
    rng = np.random.default_rng(0)
    cases = [("transport_simplex", k, simplex_case, simplex_cost) for k in (16, 32, 64)]
    cases += [("laguerre_cells", k, laguerre_case, laguerre_mass) for k in (16, 64, 256)]
    print(f"{'kernel':<20}{'size':>6}{'python [s]':>14}{'cython [s]':>14}{'speedup':>10}")
    for name, k, make, summary in cases:
        inputs = make(k, rng)
        tp, op = best_of(lambda: getattr(py, name)(*inputs), args.repeat)
        tc, oc = best_of(lambda: getattr(cy, name)(*inputs), args.repeat)
        if not np.allclose(summary(op, inputs), summary(oc, inputs), rtol=1e-9, atol=1e-12):
            raise SystemExit(f"{name} k={k}: backends disagree")
        print(f"{name:<20}{k:>6}{tp:>14.4f}{tc:>14.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
