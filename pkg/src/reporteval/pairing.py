"""Sentence pairing: match candidate items to reference items by cosine.

Each candidate item is assigned its argmax-cosine reference item (greedy,
many-to-one allowed, ties broken by lowest reference index). The built-in
embedding provider is a corpus-fit TF-IDF over word unigrams plus character
3-grams: deterministic and dependency-free. Any stronger sentence-embedding
model can be plugged in through the external provider protocol, either an
HTTP endpoint or a subprocess exchanging one JSON document each way:

    request:  {"batch_id": str, "sentences": [str, ...]}
    response: {"batch_id": str, "vectors": [[float, ...], ...]}
"""
from __future__ import annotations

import hashlib
import json
import math
import re
import shlex
import subprocess
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import EvalCase, Report, SentenceItem

__all__ = [
    "PairingError",
    "ProviderError",
    "PairAssignment",
    "FallbackEmbedder",
    "ExternalEmbedder",
    "build_provider",
    "pair_sentences",
    "paired_variant",
]


class PairingError(Exception):
    """Pairing is impossible (a side has no items)."""


class ProviderError(Exception):
    """An embedding provider returned unusable output."""


@dataclass(frozen=True)
class PairAssignment:
    """One (candidate_index, reference_index, cosine) triple per candidate item."""

    pairs: tuple[tuple[int, int, float], ...]
    direction: str = "candidate_to_reference"


_WORD_RE = re.compile(r"\d+\.\d+|\d+|[^\W\d_]+")


def _features(sentence: str) -> Counter:
    text = " ".join(_WORD_RE.findall(sentence.lower()))
    feats: Counter = Counter(("w", w) for w in text.split())
    feats.update(("c3", text[i : i + 3]) for i in range(len(text) - 2))
    return feats


class FallbackEmbedder:
    """L2-normalized TF-IDF embedding fit on a fixed sentence collection.

    idf(t) = log((1 + N) / (1 + df(t))) + 1; features unseen at fit time are
    ignored at embed time. The fit is done once (single-threaded) and the
    table is read-only afterwards, so embedding may run concurrently.
    """

    name = "tfidf-fallback"

    def __init__(self, vocabulary: dict, idf: np.ndarray):
        self._vocabulary = vocabulary
        self._idf = idf
        self.dimension = len(vocabulary)

    @classmethod
    def fit(cls, sentences: Iterable[str]) -> "FallbackEmbedder":
        df: Counter = Counter()
        n_docs = 0
        for sentence in sentences:
            n_docs += 1
            df.update(set(_features(sentence)))
        vocabulary = {feat: i for i, feat in enumerate(sorted(df))}
        idf = np.empty(len(vocabulary))
        for feat, i in vocabulary.items():
            idf[i] = math.log((1 + n_docs) / (1 + df[feat])) + 1.0
        return cls(vocabulary, idf)

    def embed(self, sentences: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(sentences), self.dimension))
        for row, sentence in enumerate(sentences):
            for feat, count in _features(sentence).items():
                col = self._vocabulary.get(feat)
                if col is not None:
                    out[row, col] = count * self._idf[col]
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class ExternalEmbedder:
    """Provider adapter speaking the JSON batch protocol.

    `target` is an http(s) URL (POSTed to) or a shell command (JSON on
    stdin, JSON on stdout). Vector dimension is learned from the first
    batch and enforced afterwards.
    """

    def __init__(self, target: str, timeout: float = 60.0):
        self.target = target
        self.timeout = timeout
        self.name = f"external:{target}"
        self.dimension: int | None = None

    def _exchange(self, payload: dict) -> dict:
        body = json.dumps(payload)
        if self.target.startswith(("http://", "https://")):
            import httpx

            try:
                response = httpx.post(self.target, content=body, timeout=self.timeout)
                response.raise_for_status()
                return response.json()
            except Exception as exc:
                raise ProviderError(f"{self.name}: batch {payload['batch_id']} failed: {exc}") from exc
        try:
            proc = subprocess.run(
                shlex.split(self.target),
                input=body.encode(),
                capture_output=True,
                timeout=self.timeout,
                check=True,
            )
            return json.loads(proc.stdout)
        except Exception as exc:
            raise ProviderError(f"{self.name}: batch {payload['batch_id']} failed: {exc}") from exc

    def embed(self, sentences: Sequence[str]) -> np.ndarray:
        digest = hashlib.sha1(chr(0).join(sentences).encode()).hexdigest()[:12]
        batch_id = f"batch-{digest}"
        reply = self._exchange({"batch_id": batch_id, "sentences": list(sentences)})
        if reply.get("batch_id") != batch_id:
            raise ProviderError(f"{self.name}: batch {batch_id}: wrong batch_id in reply")
        vectors = reply.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(sentences):
            raise ProviderError(
                f"{self.name}: batch {batch_id}: expected {len(sentences)} vectors"
            )
        matrix = np.asarray(vectors, dtype=float)
        if matrix.ndim != 2 or not np.all(np.isfinite(matrix)):
            raise ProviderError(f"{self.name}: batch {batch_id}: malformed vectors")
        if self.dimension is None:
            self.dimension = matrix.shape[1]
        elif matrix.shape[1] != self.dimension:
            raise ProviderError(
                f"{self.name}: batch {batch_id}: dimension {matrix.shape[1]} != {self.dimension}"
            )
        return matrix


def build_provider(spec: str, corpus_sentences: Iterable[str] = ()):
    """Create a provider from a CLI-style spec: "fallback" or "external:...". """
    if spec == "fallback":
        return FallbackEmbedder.fit(corpus_sentences)
    if spec.startswith("external:"):
        return ExternalEmbedder(spec[len("external:") :])
    raise ValueError(f"unknown embedder spec {spec!r}")


def _normalized_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return matrix / safe


def pair_sentences(candidate: Report, reference: Report, provider=None) -> PairAssignment:
    """Assign every candidate item its most-similar reference item.

    Deterministic: ties go to the lowest reference index, and the fallback
    provider is itself deterministic. Raises PairingError when either side
    has no items.
    """
    if not candidate.items:
        raise PairingError(f"candidate report {candidate.id} has no items")
    if not reference.items:
        raise PairingError(f"reference report {reference.id} has no items")
    cand_texts = [it.text for it in candidate.items]
    ref_texts = [it.text for it in reference.items]
    if provider is None:
        provider = FallbackEmbedder.fit(cand_texts + ref_texts)
    cand_vecs = _normalized_rows(np.asarray(provider.embed(cand_texts), dtype=float))
    ref_vecs = _normalized_rows(np.asarray(provider.embed(ref_texts), dtype=float))
    cosines = cand_vecs @ ref_vecs.T
    pairs = []
    for i in range(len(cand_texts)):
        j = int(np.argmax(cosines[i]))
        pairs.append((i, j, float(cosines[i, j])))
    return PairAssignment(pairs=tuple(pairs))


def paired_variant(
    case: EvalCase, provider=None
) -> list[tuple[SentenceItem, SentenceItem]]:
    """One (candidate item, matched reference item) scoring instance per
    candidate item; downstream metrics average the per-pair scores."""
    assignment = pair_sentences(case.candidate, case.reference, provider)
    return [
        (case.candidate.items[ci], case.reference.items[ri])
        for ci, ri, _ in assignment.pairs
    ]
