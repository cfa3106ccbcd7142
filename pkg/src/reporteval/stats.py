"""Correlation, rank tests, regression, and keyword-frequency analytics."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import stdtr

from .corpus import EvalCase
from .forte import KeywordBank

__all__ = [
    "StatsError",
    "CorrelationResult",
    "MannWhitneyResult",
    "FrequencyPoint",
    "RegressionResult",
    "pearson",
    "spearman",
    "rankdata",
    "mann_whitney_u",
    "keyword_frequency",
    "recall_regression",
    "metric_correlation_matrix",
    "significance_stars",
]

# Exact Mann-Whitney enumeration is used up to this combined sample size;
# the tie-corrected normal approximation takes over beyond it.
EXACT_MWU_LIMIT = 12


class StatsError(Exception):
    """Statistic undefined for the given input (e.g. zero variance)."""


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    method: str  # "exact" or "normal"


@dataclass(frozen=True)
class FrequencyPoint:
    keyword: str
    freq_reference: int
    freq_candidate: int


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    n: int


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Sample Pearson r with a two-tailed p from the t distribution."""
    if len(x) != len(y):
        raise StatsError("x and y must have equal length")
    n = len(x)
    if n < 3:
        raise StatsError(f"pearson requires n >= 3, got {n}")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    denom = math.sqrt(float(xd @ xd) * float(yd @ yd))
    if denom == 0.0:
        raise StatsError("zero variance: correlation undefined")
    r = float(xd @ yd) / denom
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = 2.0 * float(stdtr(n - 2, -abs(t)))
    return CorrelationResult(r=r, p_value=p, n=n)


def rankdata(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties averaged (fractional ranking)."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Pearson over average ranks (ties averaged)."""
    return pearson(rankdata(x), rankdata(y))


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """Two-tailed Mann-Whitney U test.

    U is computed from rank sums with average ranks for ties. The p-value is
    exact (full permutation enumeration, doubled smaller tail capped at 1)
    when the combined sample size is <= EXACT_MWU_LIMIT, otherwise a normal
    approximation with tie-corrected variance and continuity correction.
    """
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise StatsError("both samples must be nonempty")
    pooled = list(a) + list(b)
    ranks = rankdata(pooled)
    r_a = sum(ranks[:n_a])
    u_obs = r_a - n_a * (n_a + 1) / 2.0
    n = n_a + n_b

    if n <= EXACT_MWU_LIMIT:
        offset = n_a * (n_a + 1) / 2.0
        us = [
            sum(ranks[i] for i in combo) - offset
            for combo in itertools.combinations(range(n), n_a)
        ]
        total = len(us)
        eps = 1e-9
        lower = sum(1 for u in us if u <= u_obs + eps)
        upper = sum(1 for u in us if u >= u_obs - eps)
        p = min(1.0, 2.0 * min(lower, upper) / total)
        return MannWhitneyResult(u=u_obs, p_value=p, method="exact")

    mean = n_a * n_b / 2.0
    tie_term = sum(t**3 - t for t in Counter(pooled).values())
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        return MannWhitneyResult(u=u_obs, p_value=1.0, method="normal")
    z = (abs(u_obs - mean) - 0.5) / math.sqrt(var)
    p = min(1.0, 2.0 * _normal_sf(max(0.0, z)))
    return MannWhitneyResult(u=u_obs, p_value=p, method="normal")


def _count_occurrences(pattern_words: list[str], tokens: Sequence[str]) -> int:
    k = len(pattern_words)
    return sum(1 for i in range(len(tokens) - k + 1) if list(tokens[i : i + k]) == pattern_words)


def keyword_frequency(
    cases: Sequence[EvalCase], bank: KeywordBank | None = None
) -> list[FrequencyPoint]:
    """Corpus keyword totals in references vs candidates.

    With a bank, every surface term of every category is counted (multiword
    surfaces as token subsequences); without one, every token is. Sorted by
    descending reference count, then alphabetically.
    """
    ref_tokens: list[str] = []
    cand_tokens: list[str] = []
    for case in cases:
        ref_tokens.extend(case.reference.tokens)
        cand_tokens.extend(case.candidate.tokens)
    points: list[FrequencyPoint] = []
    if bank is None:
        ref_counts = Counter(ref_tokens)
        cand_counts = Counter(cand_tokens)
        for keyword in sorted(set(ref_counts) | set(cand_counts)):
            points.append(
                FrequencyPoint(keyword, ref_counts.get(keyword, 0), cand_counts.get(keyword, 0))
            )
    else:
        from .textproc import tokenize

        surfaces = sorted({s for cat in bank.categories for s in bank.surfaces(cat)})
        for surface in surfaces:
            words = tokenize(surface)
            if not words:
                continue
            points.append(
                FrequencyPoint(
                    surface,
                    _count_occurrences(words, ref_tokens),
                    _count_occurrences(words, cand_tokens),
                )
            )
    points.sort(key=lambda p: (-p.freq_reference, p.keyword))
    return points


def recall_regression(points: Sequence[FrequencyPoint]) -> RegressionResult:
    """OLS of log10(candidate count) on log10(reference count).

    Only points with both counts positive enter the fit; fewer than 3 usable
    points (or zero spread in the reference counts) is an error.
    """
    usable = [p for p in points if p.freq_reference > 0 and p.freq_candidate > 0]
    if len(usable) < 3:
        raise StatsError(f"recall_regression needs >= 3 usable points, got {len(usable)}")
    x = np.log10([p.freq_reference for p in usable])
    y = np.log10([p.freq_candidate for p in usable])
    xd = x - x.mean()
    sxx = float(xd @ xd)
    if sxx == 0.0:
        raise StatsError("reference counts have zero spread on the log scale")
    slope = float(xd @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (slope * x + intercept)
    ss_res = float(residuals @ residuals)
    ss_tot = float((y - y.mean()) @ (y - y.mean()))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res < 1e-18 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return RegressionResult(slope=slope, intercept=intercept, r_squared=r_squared, n=len(usable))


def metric_correlation_matrix(
    columns: Mapping[str, Sequence[Optional[float]]],
) -> dict[tuple[str, str], Optional[CorrelationResult]]:
    """Pairwise Pearson over score columns (pairwise-complete observations).

    Diagonal entries are r=1 with p=0. Pairs involving a constant column, or
    with fewer than 3 complete observations, are None (undefined).
    """
    names = list(columns)
    out: dict[tuple[str, str], Optional[CorrelationResult]] = {}
    for i, name_i in enumerate(names):
        for name_j in names[i:]:
            if name_i == name_j:
                n = sum(1 for v in columns[name_i] if v is not None)
                out[(name_i, name_j)] = CorrelationResult(r=1.0, p_value=0.0, n=n)
                continue
            xs, ys = [], []
            for xv, yv in zip(columns[name_i], columns[name_j]):
                if xv is not None and yv is not None:
                    xs.append(float(xv))
                    ys.append(float(yv))
            try:
                result = pearson(xs, ys)
            except StatsError:
                result = None
            out[(name_i, name_j)] = result
            out[(name_j, name_i)] = result
    return out
