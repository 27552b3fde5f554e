"""Compare the compiled hypervolume kernel against the pure-Python twin.

Two workloads:
  fronts  - isolated calls on random nondominated-ish fronts, swept over
            dimension and front size
  subset  - the shape the selection GA produces: thousands of calls on
            small k-subsets of one normalized front

Run from the repo root:
    python3 benchmarks/bench_hv.py [--repeats N]
"""

import argparse
import itertools
import time

import numpy as np

from protonas.hvss import HAVE_COMPILED, hypervolume


def random_front(rng, n, d):
    return [tuple(v) for v in rng.random((n, d)) * 0.9]


def time_backend(calls, backend, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for pts, ref in calls:
            hypervolume(pts, ref, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_fronts(repeats):
    rng = np.random.default_rng(7)
    print(f"{'d':>3} {'n':>4} {'pure ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for d, n in itertools.product((2, 3, 4, 5), (10, 25, 50)):
        ref = (1.0,) * d
        calls = [(random_front(rng, n, d), ref) for _ in range(20)]
        pure = time_backend(calls, "pure", repeats)
        if HAVE_COMPILED:
            comp = time_backend(calls, "compiled", repeats)
            print(f"{d:>3} {n:>4} {pure * 1e3:>10.2f} {comp * 1e3:>12.2f} {pure / comp:>7.1f}x")
        else:
            print(f"{d:>3} {n:>4} {pure * 1e3:>10.2f} {'n/a':>12} {'n/a':>8}")


def bench_subset_shape(repeats):
    rng = np.random.default_rng(11)
    front = rng.random((40, 5))
    ref = (1.1,) * 5
    calls = []
    for _ in range(4000):
        k = int(rng.integers(2, 6))
        idx = rng.choice(40, size=k, replace=False)
        calls.append(([tuple(front[i]) for i in idx], ref))
    pure = time_backend(calls, "pure", repeats)
    line = f"4000 k-subset calls (k=2..5, d=5): pure {pure * 1e3:.1f} ms"
    if HAVE_COMPILED:
        comp = time_backend(calls, "compiled", repeats)
        line += f", compiled {comp * 1e3:.1f} ms, speedup {pure / comp:.1f}x"
    print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=3, help="best-of-N timing repeats")
    args = ap.parse_args()
    print(f"compiled kernel available: {HAVE_COMPILED}")
    print("\nisolated fronts")
    bench_fronts(args.repeats)
    print("\nselection GA workload")
    bench_subset_shape(args.repeats)


if __name__ == "__main__":
    main()
