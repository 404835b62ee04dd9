#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Usage:  python3 benchmarks/kernel_bench.py [--repeats 5]

Times the Jacobi eigensolver sweeps and the force-directed layout loop at a
few problem sizes. The JIT path is warmed before timing so compilation cost
is not counted.
"""

import argparse
import math
import time

import numpy as np

from comention import kernels
from comention.kernels import fr_run_numpy, jacobi_sweeps_numpy


def time_call(fn, *args, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def random_adjacency(rng, n):
    a = (rng.random((n, n)) < 0.3).astype(np.float64)
    a = np.triu(a, 1)
    return a + a.T


def ring_edges(n, extra, rng):
    edges = [[i, (i + 1) % n] for i in range(n)]
    for _ in range(extra):
        i, j = rng.choice(n, size=2, replace=False)
        edges.append([min(i, j), max(i, j)])
    return np.array(edges, dtype=np.int64)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    has_numba = kernels.jacobi_sweeps_numba is not None
    if not has_numba:
        print("numba unavailable; only the numpy path will be timed")

    rng = np.random.default_rng(12345)

    print("\nJacobi eigensolver (full diagonalization)")
    print(f"{'n':>5} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for n in (8, 16, 32, 64, 128):
        a = random_adjacency(rng, n)
        tol = 1e-12 * np.linalg.norm(a)
        t_np = time_call(lambda: jacobi_sweeps_numpy(a.copy(), 100, tol), repeats=args.repeats)
        if has_numba:
            kernels.jacobi_sweeps_numba(a.copy(), 100, tol)  # warm JIT
            t_nb = time_call(
                lambda: kernels.jacobi_sweeps_numba(a.copy(), 100, tol), repeats=args.repeats
            )
            print(f"{n:>5} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>5} {t_np * 1e3:>12.3f} {'-':>12} {'-':>9}")

    print("\nForce-directed layout (500 iterations)")
    print(f"{'n':>5} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for n in (10, 30, 100, 300):
        pos = rng.random((n, 2))
        edges = ring_edges(n, n // 2, rng)
        k = math.sqrt(1.0 / n)
        t_np = time_call(
            lambda: fr_run_numpy(pos.copy(), edges, 500, 0.1, 0.05, k), repeats=args.repeats
        )
        if has_numba:
            kernels.fr_run_numba(pos.copy(), edges, 500, 0.1, 0.05, k)  # warm JIT
            t_nb = time_call(
                lambda: kernels.fr_run_numba(pos.copy(), edges, 500, 0.1, 0.05, k),
                repeats=args.repeats,
            )
            print(f"{n:>5} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>5} {t_np * 1e3:>12.3f} {'-':>12} {'-':>9}")

    print(f"\nactive backend for library calls: {kernels.BACKEND}")


if __name__ == "__main__":
    main()
