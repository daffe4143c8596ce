#!/usr/bin/env python3
"""Benchmark the compiled forward/backward recursion against the pure
Python fallback (the path taken when PHASETRACK_NO_NUMBA=1).

Usage: python3 benchmarks/bench_kernels.py [--n 4096] [--reps 50]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from phasetrack import kernels
from phasetrack.harness import ScenarioConfig, evaluate_point


def time_fn(fn, *args, reps):
    fn(*args)  # warm-up (and JIT compile for the numba path)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def bench_recursion(n, reps):
    rng = np.random.default_rng(0)
    kg = np.ascontiguousarray(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    nu_delta = 5e-3

    t_pure = time_fn(kernels._kappa_forward_backward, kg, nu_delta, reps=reps)
    if kernels.NUMBA_ENABLED:
        t_fast = time_fn(kernels.kappa_forward_backward, kg, nu_delta, reps=reps)
        ka1, kb1 = kernels.kappa_forward_backward(kg, nu_delta)
        ka2, kb2 = kernels._kappa_forward_backward(kg, nu_delta)
        agree = max(np.max(np.abs(ka1 - ka2)), np.max(np.abs(kb1 - kb2)))
        print(f"recursion n={n}: compiled {t_fast * 1e6:9.1f} us | "
              f"fallback {t_pure * 1e6:9.1f} us | speedup {t_pure / t_fast:6.1f}x | "
              f"max |diff| {agree:.2e}")
    else:
        print(f"recursion n={n}: fallback {t_pure * 1e6:9.1f} us "
              f"(numba disabled; set PHASETRACK_NO_NUMBA=0 to compare)")


def bench_end_to_end(n, reps):
    cfg = ScenarioConfig(snr_db=13, nu_delta=5e-3, compensator="spa",
                         n=n, frames=4, seed=1)
    t = time_fn(lambda: evaluate_point(cfg, 10 ** -0.5, 5e-3), reps=max(1, reps // 10))
    print(f"end-to-end SPA point (4 frames, n={n}): {t * 1e3:8.2f} ms")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=4096)
    parser.add_argument("--reps", type=int, default=50)
    args = parser.parse_args()
    print(f"numba enabled: {kernels.NUMBA_ENABLED}")
    for n in (args.n // 4, args.n, args.n * 4):
        bench_recursion(n, args.reps)
    bench_end_to_end(args.n, args.reps)


if __name__ == "__main__":
    main()
