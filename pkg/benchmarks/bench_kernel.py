"""Benchmark the compiled kernel against the pure-Python fallback.

Usage: python benchmarks/bench_kernel.py [--repeat N]

Times the divided-difference exponential kernel (the hot inner loop of every
entropy/gradient/Hessian evaluation) on representative node sets, plus an
end-to-end solver call under each backend, and reports the agreement between
the two implementations.
"""

from __future__ import annotations

import argparse
import random
import time

from fanokit._kernel import pure

try:
    from fanokit._kernel import _core as core
except ImportError:
    core = None


def _node_sets(rng, count, n1, spread):
    out = []
    for _ in range(count):
        center = rng.uniform(-3, 3)
        out.append([center + rng.uniform(-spread / 2, spread / 2) for _ in range(n1)])
    return out


def _time(fn, reps=1):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_dd(backend, sets):
    def run():
        for z in sets:
            backend.dd_exp(z)

    return _time(run, reps=3)


def bench_weighted(backend, sets, k):
    payload = [(z, [float(i) - len(z) / 2 for i in range(len(z))]) for z in sets]

    def run():
        for z, b in payload:
            backend.dd_exp_weighted(z, b, k)

    return _time(run, reps=3)


def bench_tree_sum(backend, rng):
    values = [rng.uniform(-1, 1) * 10.0 ** rng.randint(-8, 8) for _ in range(4096)]

    def run():
        for _ in range(50):
            backend.compensated_tree_sum(values)

    return _time(run, reps=3)


def bench_soliton(backend_module):
    """End-to-end 2-D soliton solve with the kernel rebound to one backend."""
    import fanokit.expint as expint
    from fanokit.geometry import RationalPolytope
    from fanokit.optimize import soliton_vector

    saved = (expint.dd_exp, expint.dd_exp_series, expint.dd_exp_weighted,
             expint.compensated_tree_sum)
    expint.dd_exp = backend_module.dd_exp
    expint.dd_exp_series = backend_module.dd_exp_series
    expint.dd_exp_weighted = backend_module.dd_exp_weighted
    expint.compensated_tree_sum = backend_module.compensated_tree_sum
    try:
        poly = RationalPolytope.from_vertices(
            [[-1, 0], [3, 0], [0, 2], [-1, 2], [2, -1]])

        def run():
            soliton_vector(poly, rank=2)

        return _time(run, reps=2)
    finally:
        (expint.dd_exp, expint.dd_exp_series, expint.dd_exp_weighted,
         expint.compensated_tree_sum) = saved


def agreement(rng, sets):
    worst = 0.0
    for z in sets:
        a, _ = pure.dd_exp(z)
        b, _ = core.dd_exp(z)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    return worst


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--count", type=int, default=2000,
                        help="kernel calls per workload")
    args = parser.parse_args()
    rng = random.Random(20240811)

    workloads = []
    for n1, spread, label in ((2, 4.0, "nodes=2 spread=4"),
                              (4, 4.0, "nodes=4 spread=4"),
                              (7, 4.0, "nodes=7 spread=4"),
                              (4, 1e-6, "nodes=4 clustered"),
                              (4, 100.0, "nodes=4 spread=1e2")):
        sets = _node_sets(rng, args.count, n1, spread)
        workloads.append((f"dd_exp {label}", lambda b, s=sets: bench_dd(b, s), sets))
    sets4 = _node_sets(rng, args.count // 2, 4, 4.0)
    workloads.append(("dd_exp_weighted k=1", lambda b: bench_weighted(b, sets4, 1), sets4))
    workloads.append(("dd_exp_weighted k=2", lambda b: bench_weighted(b, sets4, 2), sets4))
    workloads.append(("tree_sum 4096x50", lambda b: bench_tree_sum(b, rng), None))
    workloads.append(("soliton solve 2-D", lambda b: bench_soliton(b), None))

    print(f"{'workload':<26} {'pure [ms]':>12} {'compiled [ms]':>14} {'speedup':>9}")
    for label, fn, _ in workloads:
        t_pure = fn(pure) * 1e3
        if core is None:
            print(f"{label:<26} {t_pure:>12.2f} {'n/a':>14} {'n/a':>9}")
            continue
        t_core = fn(core) * 1e3
        print(f"{label:<26} {t_pure:>12.2f} {t_core:>14.2f} {t_pure / t_core:>8.1f}x")

    if core is not None:
        sets = _node_sets(rng, 500, 5, 10.0)
        print(f"\nbackend agreement (max relative diff over 500 calls): "
              f"{agreement(rng, sets):.2e}")
    else:
        print("\ncompiled backend not available; build with "
              "`python setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
