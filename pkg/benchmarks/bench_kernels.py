"""Benchmark the jitted LCS kernel against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
The same comparison on real scoring runs: set REPORTEVAL_NUMBA=0 to force
the numpy path for the whole toolkit.
"""
import time

import numpy as np

from reporteval import kernels


def bench(fn, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    if kernels.njit is None:
        print("numba unavailable; nothing to compare")
        return
    kernels.warmup()
    rng = np.random.default_rng(0)
    print(f"{'tokens/side':>12} {'pairs':>6} {'numba (s)':>10} {'numpy (s)':>10} {'speedup':>8}")
    for length, n_pairs in [(20, 2000), (60, 500), (120, 200), (300, 50)]:
        pairs = [
            (
                rng.integers(0, 50, size=length).astype(np.int64),
                rng.integers(0, 50, size=length).astype(np.int64),
            )
            for _ in range(n_pairs)
        ]
        t_jit = bench(kernels._lcs_len_jit, pairs)
        t_np = bench(kernels._lcs_len_numpy, pairs)
        print(f"{length:>12} {n_pairs:>6} {t_jit:>10.4f} {t_np:>10.4f} {t_np / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
