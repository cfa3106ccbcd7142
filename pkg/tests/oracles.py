"""Independent brute-force oracles used to freeze expected test values.

Each oracle deliberately takes a different computational route from the
implementation it checks (recursion instead of DP tables, pairwise
comparison instead of rank sums, explicit sums instead of vector algebra).
"""
import itertools
import math
from functools import lru_cache


def lcs_brute(a, b):
    """LCS length via memoized recursion on suffixes."""
    ta, tb = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(ta) or j == len(tb):
            return 0
        if ta[i] == tb[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    result = rec(0, 0)
    rec.cache_clear()
    return result


def rouge_l_oracle(candidate, reference, beta=1.2):
    lcs = lcs_brute(candidate, reference)
    if lcs == 0 or not candidate or not reference:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return 100.0 * (1 + beta**2) * p * r / (r + beta**2 * p)


def mwu_exact_oracle(a, b):
    """Two-tailed exact Mann-Whitney p via subset enumeration.

    U is recomputed per split by pairwise comparison (0.5 per tie), never
    via rank sums. p = min(1, 2*min(P(U<=u), P(U>=u))).
    """
    pooled = list(a) + list(b)
    n_a = len(a)

    def u_of(sample_a, sample_b):
        u = 0.0
        for x in sample_a:
            for y in sample_b:
                if x > y:
                    u += 1.0
                elif x == y:
                    u += 0.5
        return u

    u_obs = u_of(a, b)
    us = []
    indices = range(len(pooled))
    for combo in itertools.combinations(indices, n_a):
        chosen = set(combo)
        sample_a = [pooled[i] for i in combo]
        sample_b = [pooled[i] for i in indices if i not in chosen]
        us.append(u_of(sample_a, sample_b))
    eps = 1e-9
    lower = sum(1 for u in us if u <= u_obs + eps)
    upper = sum(1 for u in us if u >= u_obs - eps)
    return min(1.0, 2.0 * min(lower, upper) / len(us))


def pearson_oracle(x, y):
    """Pearson r by the direct covariance formula with explicit loops."""
    n = len(x)
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    cov = sum((xi - mean_x) * (yi - mean_y) for xi, yi in zip(x, y))
    var_x = sum((xi - mean_x) ** 2 for xi in x)
    var_y = sum((yi - mean_y) ** 2 for yi in y)
    return cov / math.sqrt(var_x * var_y)


def forte_scan_oracle(item_texts, bank):
    """Exhaustive surface scan: every bank surface tested against every item.

    Replicates the global longest-first consumption rule with explicit
    position bookkeeping: all matches of all categories are collected first,
    then accepted longest-first; a shorter overlapping span loses, an
    exact-equal span from another category also counts.
    """
    import re

    surfaces = [
        (s, cat, g.representative)
        for cat, groups in bank.categories.items()
        for g in groups
        for s in g.surfaces
    ]
    surfaces.sort(key=lambda sr: (-len(sr[0].split()), -len(sr[0]), sr[0], sr[1]))
    result = {cat: set() for cat in bank.categories}
    for text in item_texts:
        candidates = []
        for surface, cat, rep in surfaces:
            pattern = re.compile(
                r"\b" + r"\s+".join(re.escape(w) for w in surface.split()) + r"\b",
                re.IGNORECASE,
            )
            start = 0
            while True:
                m = pattern.search(text, start)
                if not m:
                    break
                candidates.append((surface, cat, m.start(), m.end(), rep))
                start = m.start() + 1
        # same precedence policy as the bank: longest surface first
        candidates.sort(key=lambda c: (-len(c[0].split()), -len(c[0]), c[0], c[1]))
        accepted = []
        for _, cat, s, e, rep in candidates:
            span = (s, e)
            conflict = any(
                span != other and s < other[1] and other[0] < e for other in accepted
            )
            if conflict:
                continue
            if span not in accepted:
                accepted.append(span)
            result[cat].add(rep)
    return result


def tfidf_cosine_oracle(sentence_a, sentence_b, corpus):
    """Fallback-embedder cosine recomputed with explicit dictionaries."""
    import re
    from collections import Counter

    token_re = re.compile(r"\d+\.\d+|\d+|[^\W\d_]+")

    def feats(sentence):
        text = " ".join(token_re.findall(sentence.lower()))
        c = Counter(("w", w) for w in text.split())
        c.update(("c3", text[i : i + 3]) for i in range(len(text) - 2))
        return c

    df = Counter()
    for doc in corpus:
        df.update(set(feats(doc)))
    n = len(corpus)

    def vector(sentence):
        return {
            f: count * (math.log((1 + n) / (1 + df[f])) + 1.0)
            for f, count in feats(sentence).items()
            if f in df
        }

    va, vb = vector(sentence_a), vector(sentence_b)
    dot = sum(w * vb.get(f, 0.0) for f, w in va.items())
    na = math.sqrt(sum(w * w for w in va.values()))
    nb = math.sqrt(sum(w * w for w in vb.values()))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)
