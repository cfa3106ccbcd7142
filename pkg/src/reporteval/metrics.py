"""From-scratch captioning metrics: BLEU-1..4, METEOR, ROUGE-L, CIDEr-R.

Scale conventions follow the score tables this toolkit emits: BLEU, METEOR
and ROUGE-L live in [0, 100]; CIDEr-R in [0, 1000].

METEOR is the exact-match variant (no synonym or paraphrase tables); its
chunk count uses greedy longest-fragment-first alignment, the usual
practical stand-in for exact chunk minimization.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from . import kernels
from .textproc import ngrams

__all__ = [
    "MetricConfig",
    "CiderSigmaMode",
    "IdfTable",
    "bleu",
    "modified_precision_counts",
    "meteor",
    "meteor_alignment",
    "rouge_l",
    "cider_r",
    "cider_r_case",
]


class CiderSigmaMode(str, Enum):
    FIXED6 = "fixed6"
    REF_RELATIVE = "ref_relative"


@dataclass(frozen=True)
class MetricConfig:
    bleu_max_n: int = 4
    rouge_beta: float = 1.2
    cider_n: int = 4
    cider_scale: float = 1000.0
    cider_sigma_mode: CiderSigmaMode = CiderSigmaMode.REF_RELATIVE

    # METEOR constants (exact-match variant): Fmean = 10PR/(R+9P),
    # penalty = 0.5 * (chunks/matches)^3.
    meteor_gamma: float = 0.5
    meteor_penalty_exponent: int = 3

    def __post_init__(self) -> None:
        if self.bleu_max_n < 1 or self.cider_n < 1:
            raise ValueError("n-gram orders must be >= 1")
        if self.rouge_beta <= 0 or self.cider_scale <= 0:
            raise ValueError("rouge_beta and cider_scale must be positive")


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------


def modified_precision_counts(
    candidate: Sequence[str], reference: Sequence[str], n: int
) -> tuple[int, int]:
    """(clipped match count, candidate n-gram count) for order n."""
    cand_grams = ngrams(candidate, n)
    total = sum(cand_grams.values())
    if total == 0:
        return 0, 0
    ref_grams = ngrams(reference, n)
    clipped = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
    return clipped, total


def bleu(candidate: Sequence[str], reference: Sequence[str], n: int = 4) -> float:
    """Unsmoothed BLEU-n in [0, 100].

    Geometric mean of clipped modified precisions p_1..p_n times the brevity
    penalty min(1, e^(1 - r/c)). Without smoothing any p_i = 0 zeroes the
    score, so candidates sharing no n-gram of order <= n score 0.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    c, r = len(candidate), len(reference)
    if c == 0 or r == 0:
        return 0.0
    log_sum = 0.0
    for order in range(1, n + 1):
        clipped, total = modified_precision_counts(candidate, reference, order)
        if clipped == 0 or total == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return 100.0 * brevity * math.exp(log_sum / n)


# ---------------------------------------------------------------------------
# METEOR (exact-match variant)
# ---------------------------------------------------------------------------


def meteor_alignment(candidate: Sequence[str], reference: Sequence[str]) -> tuple[int, int]:
    """(matches, chunks) of the exact-match alignment.

    Matches is the maximum one-to-one exact matching, sum over words of
    min(candidate count, reference count). Chunks come from repeatedly
    consuming the longest contiguous common fragment among still-unmatched
    positions (ties broken by lowest candidate then reference index).
    """
    matches = sum((Counter(candidate) & Counter(reference)).values())
    if matches == 0:
        return 0, 0
    avail_c = [True] * len(candidate)
    avail_r = [True] * len(reference)
    chunks = 0
    while True:
        best_len, best_i, best_j = 0, -1, -1
        for i in range(len(candidate)):
            if not avail_c[i]:
                continue
            for j in range(len(reference)):
                if not avail_r[j] or candidate[i] != reference[j]:
                    continue
                length = 0
                while (
                    i + length < len(candidate)
                    and j + length < len(reference)
                    and avail_c[i + length]
                    and avail_r[j + length]
                    and candidate[i + length] == reference[j + length]
                ):
                    length += 1
                if length > best_len:
                    best_len, best_i, best_j = length, i, j
        if best_len == 0:
            break
        for k in range(best_len):
            avail_c[best_i + k] = False
            avail_r[best_j + k] = False
        chunks += 1
    return matches, chunks


def meteor(
    candidate: Sequence[str],
    reference: Sequence[str],
    config: MetricConfig | None = None,
) -> float:
    """Exact-match METEOR in [0, 100]; 0 when either side is empty."""
    config = config or MetricConfig()
    if not candidate or not reference:
        return 0.0
    matches, chunks = meteor_alignment(candidate, reference)
    if matches == 0:
        return 0.0
    precision = matches / len(candidate)
    recall = matches / len(reference)
    fmean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = config.meteor_gamma * (chunks / matches) ** config.meteor_penalty_exponent
    return 100.0 * fmean * (1.0 - penalty)


# ---------------------------------------------------------------------------
# ROUGE-L
# ---------------------------------------------------------------------------


def rouge_l(candidate: Sequence[str], reference: Sequence[str], beta: float = 1.2) -> float:
    """LCS-based F-score in [0, 100]: F = (1+b^2)PR / (R + b^2 P)."""
    if not candidate or not reference:
        return 0.0
    lcs = kernels.lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    beta2 = beta * beta
    return 100.0 * (1.0 + beta2) * precision * recall / (recall + beta2 * precision)


# ---------------------------------------------------------------------------
# CIDEr-R
# ---------------------------------------------------------------------------


class IdfTable:
    """Per-order idf weights over the reference units of one scoring variant.

    weight(g) = max(0, log(N / df(g))) with df = number of reference units
    containing g, so duplicating every reference unit leaves weights
    unchanged. Unseen n-grams get the maximum weight log(N).
    """

    def __init__(self, tables: dict[int, dict[tuple, float]], n_units: int, max_n: int):
        if n_units < 1:
            raise ValueError("IdfTable requires at least one reference unit")
        self._tables = tables
        self.n_units = n_units
        self.max_n = max_n

    @classmethod
    def from_reference_units(cls, units: Iterable[Sequence[str]], max_n: int = 4) -> "IdfTable":
        unit_list = list(units)
        tables: dict[int, dict[tuple, float]] = {}
        n = len(unit_list)
        if n == 0:
            raise ValueError("IdfTable requires at least one reference unit")
        for order in range(1, max_n + 1):
            df: Counter = Counter()
            for unit in unit_list:
                df.update(set(ngrams(unit, order)))
            tables[order] = {g: max(0.0, math.log(n / c)) for g, c in df.items()}
        return cls(tables, n, max_n)

    def weight(self, gram: tuple, order: int) -> float:
        table = self._tables[order]
        if gram in table:
            return table[gram]
        return max(0.0, math.log(self.n_units))


def _cosine(u: dict, v: dict) -> float:
    # Degenerate zero-norm vectors yield 0: an all-common-words candidate
    # carries no consensus signal.
    norm_u = math.sqrt(sum(w * w for w in u.values()))
    norm_v = math.sqrt(sum(w * w for w in v.values()))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    dot = sum(w * v[g] for g, w in u.items() if g in v)
    return dot / (norm_u * norm_v)


def cider_r_case(
    candidate: Sequence[str],
    reference: Sequence[str],
    idf: IdfTable,
    config: MetricConfig | None = None,
) -> float:
    """CIDEr-R for one candidate/reference unit against a prebuilt IdfTable.

    Candidate n-gram counts are clipped to the reference counts (repetition
    control) before TF-IDF weighting; each order's cosine is scaled by the
    Gaussian length penalty and the orders are averaged.
    """
    config = config or MetricConfig()
    if config.cider_sigma_mode is CiderSigmaMode.FIXED6:
        sigma = 6.0
    else:
        sigma = max(6.0, 0.1 * len(reference))
    delta = len(candidate) - len(reference)
    penalty = math.exp(-(delta * delta) / (2.0 * sigma * sigma))
    total = 0.0
    for order in range(1, config.cider_n + 1):
        ref_grams = ngrams(reference, order)
        cand_grams = ngrams(candidate, order)
        cand_vec = {
            g: min(c, ref_grams[g]) * idf.weight(g, order)
            for g, c in cand_grams.items()
            if g in ref_grams
        }
        ref_vec = {g: c * idf.weight(g, order) for g, c in ref_grams.items()}
        total += penalty * _cosine(cand_vec, ref_vec)
    return config.cider_scale * total / config.cider_n


def cider_r(
    units: Sequence[tuple[Sequence[str], Sequence[str]]],
    idf: IdfTable | None = None,
    config: MetricConfig | None = None,
) -> tuple[list[float], float]:
    """Score (candidate, reference) units; returns (per-unit scores, mean).

    When idf is omitted the table is built from the given reference units,
    which is the single-corpus common case.
    """
    config = config or MetricConfig()
    if idf is None:
        idf = IdfTable.from_reference_units([r for _, r in units], max_n=config.cider_n)
    scores = [cider_r_case(c, r, idf, config) for c, r in units]
    mean = sum(scores) / len(scores) if scores else 0.0
    return scores, mean
