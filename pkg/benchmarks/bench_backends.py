#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the numpy fallback.

Run from the repository root after building the extension in place:

    python setup.py build_ext --inplace
    python benchmarks/bench_backends.py
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from newsflow import _purepy  # noqa: E402

try:
    from newsflow import _kernels
except ImportError:
    _kernels = None

rng = np.random.default_rng(0)

FLOWS = rng.normal(size=(160, 57))
PAIR_A = rng.normal(size=57)
PAIR_B = rng.normal(size=57)
LONG_A = rng.normal(size=600)
LONG_B = rng.normal(size=600)
BLOCK_A = rng.dirichlet(np.ones(24), 15)
BLOCK_B = rng.dirichlet(np.ones(24), 15)

CASES = [
    ("dtw_cost 57x57", lambda m: m.dtw_cost(PAIR_A, PAIR_B), 200),
    ("dtw_cost 600x600", lambda m: m.dtw_cost(LONG_A, LONG_B), 3),
    ("dtw_cost_path 57x57", lambda m: m.dtw_cost_path(PAIR_A, PAIR_B), 100),
    ("pairwise_dtw 160 flows", lambda m: m.pairwise_dtw(FLOWS), 1),
    ("softdtw_grad 57x57", lambda m: m.softdtw_grad(PAIR_A, PAIR_B, 1.0), 50),
    ("paired_jsd_mean 15x24", lambda m: m.paired_jsd_mean(BLOCK_A, BLOCK_B), 500),
]


def best_of(fn, repeats):
    best = np.inf
    for _ in range(3):
        start = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - start) / repeats)
    return best


def main():
    print(f"{'kernel':<26} {'purepy':>12} {'cython':>12} {'speedup':>9}")
    for name, call, repeats in CASES:
        t_pure = best_of(lambda: call(_purepy), repeats)
        if _kernels is None:
            print(f"{name:<26} {t_pure * 1e3:>10.3f}ms {'absent':>12} {'-':>9}")
            continue
        t_cy = best_of(lambda: call(_kernels), repeats)
        print(
            f"{name:<26} {t_pure * 1e3:>10.3f}ms {t_cy * 1e3:>10.3f}ms "
            f"{t_pure / t_cy:>8.1f}x"
        )
    if _kernels is None:
        print("\ncompiled extension not built; run: python setup.py build_ext --inplace")


if __name__ == "__main__":
    main()
