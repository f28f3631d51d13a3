#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Times the lockstep run-pair kernel (the hot path of sweeps and of the
per-round identity checks) at a few grid sizes and prints the speedup.

Usage: python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from multitime._kernels import HAVE_CYTHON, _slaz_py

SIZES = [(8, 512), (16, 2048), (32, 4096), (32, 8192)]


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    impls = [("python", _slaz_py)]
    if HAVE_CYTHON:
        from multitime._kernels import _slaz_cy
        impls.append(("cython", _slaz_cy))
    else:
        print("compiled backend not available; timing the fallback only\n")

    print(f"{'M':>5} {'N':>6} {'rounds':>8}  " +
          "  ".join(f"{name:>10}" for name, _ in impls) +
          ("   speedup" if len(impls) == 2 else ""))
    for m, n in SIZES:
        row = [f"{m:>5} {n:>6} {m * n:>8}"]
        durations = []
        results = []
        for name, impl in impls:
            dt = best_time(lambda: results.append(impl.slaz_pair(m, n, True)), args.repeat)
            durations.append(dt)
            row.append(f"{dt * 1e3:>9.1f}ms")
        if len(impls) == 2:
            row.append(f"{durations[0] / durations[1]:>8.1f}x")
            a, b = results[-2], results[-1]
            assert all(np.array_equal(x, y) for x, y in zip(a, b)), "backends disagree"
        print("  ".join(row))


if __name__ == "__main__":
    main()
