"""Time the compiled and pure-Python submarine kernels on the same workloads.

Usage: python3 benchmarks/bench_kernels.py [--grid 8] [--repeat 3]

Both backends are imported directly, so the comparison does not depend on
which one the package selected at import.
"""
from __future__ import annotations

import argparse
import statistics
import time

from infoplan.domains import Grid
from infoplan.kernels import _pure, pack_tables

try:
    from infoplan.kernels import _fast
except ImportError:
    _fast = None


def _min_horizon(impl, sonar, moves, start, cells):
    target = cells - 1
    for n in range(-(-target // 5), 2 * cells + 1):
        if impl.rollout_run(sonar, moves, start, n, target)[2]:
            return n
    return None


def workloads(grid):
    sonar, moves = pack_tables(grid)
    n = grid.n_cells
    return {
        "greedy, all starts": lambda impl: [
            impl.greedy_run(sonar, moves, s, 2 * n, n - 1) for s in range(n)
        ],
        "rollout min-horizon, all starts": lambda impl: [
            _min_horizon(impl, sonar, moves, s, n) for s in range(n)
        ],
    }


def bench(fn, impl, repeat):
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(impl)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--grid", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    grid = Grid(args.grid)
    print(f"grid {args.grid}x{args.grid}, median of {args.repeat}")
    print(f"{'workload':34s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, fn in workloads(grid).items():
        tp, rp = bench(fn, _pure, args.repeat)
        if _fast is None:
            print(f"{name:34s} {tp:10.4f} {'n/a':>10s} {'n/a':>8s}")
            continue
        tf, rf = bench(fn, _fast, args.repeat)
        if rp != rf:
            raise SystemExit(f"backends disagree on {name!r}")
        print(f"{name:34s} {tp:10.4f} {tf:10.4f} {tp / tf:7.1f}x")


if __name__ == "__main__":
    main()
