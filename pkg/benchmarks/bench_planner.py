"""Timing comparison between the compiled planner kernels and the pure twin.

Both implementations use identical arithmetic and tie-breaking, so outputs
are checked for equality while timing. Run from the repo root:

    python3 benchmarks/bench_planner.py
    python3 benchmarks/bench_planner.py --size 160 --grids 12 --repeat 5
"""

from __future__ import annotations

import argparse
import math
from time import perf_counter

import numpy as np
from numpy.random import default_rng

from mulesim.planning import pure

try:
    from mulesim.planning import _speedups
except ImportError:
    _speedups = None


def make_grids(seed: int, size: int, count: int) -> list[np.ndarray]:
    rng = default_rng(seed)
    grids = []
    for _ in range(count):
        cost = rng.uniform(1.0, 10.0, size=(size, size))
        cost[rng.random((size, size)) < 0.15] = np.inf
        cost[0, 0] = 1.0
        cost[size - 1, size - 1] = 1.0
        grids.append(cost)
    return grids


def time_astar(impl, grids: list[np.ndarray], repeat: int) -> tuple[float, list]:
    best = math.inf
    results = []
    for _ in range(repeat):
        t0 = perf_counter()
        results = []
        for cost in grids:
            n = cost.shape[0]
            results.append(impl.astar_path(cost, 0, 0, n - 1, n - 1, 1.0))
        best = min(best, perf_counter() - t0)
    return best, results


def time_field(impl, grids: list[np.ndarray], repeat: int) -> tuple[float, list]:
    best = math.inf
    results = []
    for _ in range(repeat):
        t0 = perf_counter()
        results = [impl.distance_field(cost, 0, 0, 1.0) for cost in grids]
        best = min(best, perf_counter() - t0)
    return best, results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=120, help="grid side length")
    parser.add_argument("--grids", type=int, default=8, help="grids per pass")
    parser.add_argument("--repeat", type=int, default=3, help="passes, best kept")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _speedups is None:
        print("compiled backend not built; nothing to compare")
        return 1

    grids = make_grids(args.seed, args.size, args.grids)
    print(f"{args.grids} grids of {args.size}x{args.size}, best of {args.repeat} passes")

    t_fast, r_fast = time_astar(_speedups, grids, args.repeat)
    t_slow, r_slow = time_astar(pure, grids, args.repeat)
    for fast, slow in zip(r_fast, r_slow):
        assert (fast is None) == (slow is None)
        if fast is not None:
            assert fast[0] == slow[0] and fast[1] == slow[1]
    print(f"astar_path      compiled {t_fast:8.3f}s  pure {t_slow:8.3f}s  "
          f"speedup {t_slow / t_fast:5.1f}x")

    t_fast, r_fast = time_field(_speedups, grids, args.repeat)
    t_slow, r_slow = time_field(pure, grids, args.repeat)
    for fast, slow in zip(r_fast, r_slow):
        assert np.array_equal(fast, slow)
    print(f"distance_field  compiled {t_fast:8.3f}s  pure {t_slow:8.3f}s  "
          f"speedup {t_slow / t_fast:5.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
