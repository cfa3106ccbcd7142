"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

ROUGE-L's longest-common-subsequence table is the one genuinely hot inner
loop in corpus scoring (quadratic in report length, run per case pair), so it
lives here in both flavors. Set REPORTEVAL_NUMBA=0 to select the pure-numpy
path; by default the jitted kernel is used when numba imports cleanly.
benchmarks/bench_kernels.py compares the two.
"""
from __future__ import annotations

import os
from typing import Hashable, Sequence

import numpy as np

__all__ = ["lcs_length", "lcs_length_ids", "backend"]


def _flag_enabled() -> bool:
    value = os.environ.get("REPORTEVAL_NUMBA", "1").strip().lower()
    return value not in {"0", "false", "off", "no"}


def _lcs_len_numpy(a: np.ndarray, b: np.ndarray) -> int:
    # Row sweep: tmp[j] = max(prev[j], prev[j-1] + eq) and the running max
    # along the row replaces the usual cur[j-1] dependency.
    if a.size == 0 or b.size == 0:
        return 0
    prev = np.zeros(b.size + 1, dtype=np.int64)
    for token in a:
        tmp = np.maximum(prev[1:], prev[:-1] + (b == token))
        prev[1:] = np.maximum.accumulate(tmp)
    return int(prev[-1])


try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

if njit is not None:

    @njit(cache=True)
    def _lcs_len_jit(a: np.ndarray, b: np.ndarray) -> int:
        n = a.shape[0]
        m = b.shape[0]
        prev = np.zeros(m + 1, dtype=np.int64)
        cur = np.zeros(m + 1, dtype=np.int64)
        for i in range(n):
            ai = a[i]
            for j in range(m):
                if ai == b[j]:
                    cur[j + 1] = prev[j] + 1
                elif prev[j + 1] >= cur[j]:
                    cur[j + 1] = prev[j + 1]
                else:
                    cur[j + 1] = cur[j]
            prev, cur = cur, prev
        return int(prev[m])


_USE_JIT = njit is not None and _flag_enabled()


def backend() -> str:
    """Name of the active LCS implementation ("numba" or "numpy")."""
    return "numba" if _USE_JIT else "numpy"


def lcs_length_ids(a: np.ndarray, b: np.ndarray) -> int:
    """LCS length of two int64 id arrays using the selected backend."""
    if _USE_JIT:
        return _lcs_len_jit(a, b)
    return _lcs_len_numpy(a, b)


def lcs_length(xs: Sequence[Hashable], ys: Sequence[Hashable]) -> int:
    """LCS length of two token sequences."""
    if not xs or not ys:
        return 0
    vocab: dict[Hashable, int] = {}
    a = np.fromiter((vocab.setdefault(t, len(vocab)) for t in xs), dtype=np.int64, count=len(xs))
    b = np.fromiter((vocab.setdefault(t, len(vocab)) for t in ys), dtype=np.int64, count=len(ys))
    return lcs_length_ids(a, b)


def warmup() -> None:
    """Trigger JIT compilation so timed paths measure steady-state work."""
    lcs_length_ids(np.arange(4, dtype=np.int64), np.arange(2, 6, dtype=np.int64))
