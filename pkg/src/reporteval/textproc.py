"""Canonical text processing: itemization, tokenization, n-grams, negation removal.

Every downstream component (metrics, keyword extraction, label matching)
consumes the output of this module, so the functions here are deterministic
total functions: same input, same output, no exceptions on odd text.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

__all__ = [
    "NegationConfig",
    "NegationMode",
    "NegationResult",
    "DEFAULT_NEGATION_CUES",
    "SECTION_HEADERS",
    "itemize_texts",
    "tokenize",
    "ngrams",
    "join_items",
    "split_clauses",
]

# Section labels that become standalone items when they lead a line.
SECTION_HEADERS = ("findings", "conclusion", "conclusions", "impression")

# Tokens: decimals stay whole ("2.0"), bare integers stay whole, letter runs
# are split off ("2.0cm" -> "2.0", "cm"). Punctuation, "/" and "-" separate.
_TOKEN_RE = re.compile(r"\d+\.\d+|\d+|[^\W\d_]+")

# A period ends a sentence only when followed by whitespace and more text.
# Decimal points ("2.0") never match because no whitespace follows them.
_SENTENCE_END_RE = re.compile(r"\.(?=\s+\S)")

# Words whose trailing period is an abbreviation dot, not a sentence end:
# laterality/history shorthand and measurement units ("r/l.", "s/p.", "2.0cm.").
_ABBREV_BEFORE_PERIOD_RE = re.compile(r"(?:^|\s)(?:r/l|s/p|(?:\d+(?:\.\d+)?)?(?:cm|mm))$", re.IGNORECASE)

_HEADER_RE = re.compile(
    r"^(%s)\b[:.]?\s*(.*)$" % "|".join(SECTION_HEADERS), re.IGNORECASE
)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation, discarding punctuation.

    "/" and "-" act as separators ("r/l" -> ["r", "l"]); decimal numbers are
    kept as single tokens ("2.0cm" -> ["2.0", "cm"]).
    """
    return _TOKEN_RE.findall(text.lower())


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    """All contiguous n-grams of `tokens` with multiplicity.

    Empty when len(tokens) < n. Raises ValueError for n < 1.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _split_sentences(segment: str) -> list[str]:
    """Split a bullet/line segment at sentence-terminal periods.

    The terminal period stays attached to its sentence. Periods after the
    abbreviations matched by _ABBREV_BEFORE_PERIOD_RE do not split.
    """
    parts: list[str] = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(segment):
        before = segment[start : m.start()]
        if _ABBREV_BEFORE_PERIOD_RE.search(before):
            continue
        parts.append(segment[start : m.end()])
        start = m.end()
    parts.append(segment[start:])
    return parts


def itemize_texts(raw_text: str) -> list[str]:
    """Deterministically decompose a report into item texts.

    Splits on ">" bullet markers and newlines, then on sentence-terminal
    periods (decimal points and abbreviation dots are not boundaries).
    Section headers ("Findings", "Conclusion", "Impression") become their own
    items. Whitespace-only fragments are dropped; order is preserved.
    """
    items: list[str] = []
    for line in raw_text.splitlines():
        for segment in line.split(">"):
            segment = segment.strip()
            if not segment:
                continue
            header = _HEADER_RE.match(segment)
            if header:
                items.append(header.group(1).strip())
                segment = header.group(2).strip()
                if not segment:
                    continue
            for sentence in _split_sentences(segment):
                sentence = sentence.strip()
                if sentence:
                    items.append(sentence)
    return items


def join_items(texts: Iterable[str]) -> str:
    """Reassemble item texts into bullet-list raw text; inverse of itemize."""
    return "\n".join("> " + t for t in texts)


# ---------------------------------------------------------------------------
# Negation removal
# ---------------------------------------------------------------------------

DEFAULT_NEGATION_CUES = frozenset(
    {
        "no",
        "not",
        "nor",
        "without",
        "neither",
        "absent",
        "absence",
        "negative",
        "unremarkable",
        "free",
    }
)

# Bare connectives left dangling when a trailing negated clause is cut off.
_DANGLING_TAIL_RE = re.compile(r"(?:\s+(?:and|or|nor|with|but)|[\s,;:]+)+$", re.IGNORECASE)


class NegationMode(str, Enum):
    CLAUSE_TRIM = "clause_trim"
    DROP_ITEM = "drop_item"


@dataclass(frozen=True)
class NegationConfig:
    """Cue inventory and granularity for negation removal.

    The cue list is configuration, not ground truth: radiology sites disagree
    on what counts as a negation marker, so callers may override it.
    """

    cue_tokens: frozenset[str] = DEFAULT_NEGATION_CUES
    mode: NegationMode = NegationMode.CLAUSE_TRIM

    def __post_init__(self) -> None:
        if not self.cue_tokens:
            raise ValueError("cue_tokens must be nonempty")
        bad = [c for c in self.cue_tokens if c != c.lower()]
        if bad:
            raise ValueError(f"cue tokens must be lowercase: {bad}")

    @classmethod
    def from_json(cls, path: str) -> "NegationConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        kwargs = {}
        if "cue_tokens" in data:
            kwargs["cue_tokens"] = frozenset(str(c).lower() for c in data["cue_tokens"])
        if "mode" in data:
            kwargs["mode"] = NegationMode(data["mode"])
        return cls(**kwargs)

    def cue_pattern(self) -> re.Pattern:
        alternatives = "|".join(re.escape(c) for c in sorted(self.cue_tokens))
        return re.compile(r"\b(?:%s)\b" % alternatives, re.IGNORECASE)


def split_clauses(text: str, config: NegationConfig) -> list[tuple[str, bool]]:
    """Split an item into (clause, negated) pieces.

    Clause boundaries are commas/semicolons plus a cut immediately before
    every cue token, so a positive finding followed by a negated qualifier
    ("... white matter without mass effect") keeps its positive head.
    """
    pattern = config.cue_pattern()
    out: list[tuple[str, bool]] = []
    for piece in re.split(r"[,;]", text):
        piece = piece.strip()
        if not piece:
            continue
        cuts = [m.start() for m in pattern.finditer(piece)]
        if not cuts:
            out.append((piece, False))
            continue
        head = piece[: cuts[0]].strip()
        if head:
            out.append((head, False))
        for start, end in zip(cuts, cuts[1:] + [len(piece)]):
            clause = piece[start:end].strip()
            if clause:
                out.append((clause, True))
    return out


@dataclass(frozen=True)
class NegationResult:
    """Surviving item texts plus the deleted text, kept for audit."""

    kept: tuple[str, ...]
    removed: tuple[str, ...] = field(default_factory=tuple)


def remove_negation_texts(item_texts: Sequence[str], config: NegationConfig | None = None) -> NegationResult:
    """Delete negated content from itemized texts; idempotent.

    clause_trim (default) deletes only the negated clauses inside each item;
    drop_item deletes any item containing a cue token. Items that become
    empty are dropped. Surviving items keep their original order.
    """
    config = config or NegationConfig()
    cues = config.cue_tokens
    kept: list[str] = []
    removed: list[str] = []
    for text in item_texts:
        if config.mode is NegationMode.DROP_ITEM:
            if any(tok in cues for tok in tokenize(text)):
                removed.append(text)
            else:
                kept.append(text)
            continue
        clauses = split_clauses(text, config)
        surviving = [c for c, negated in clauses if not negated]
        dropped = [c for c, negated in clauses if negated]
        if dropped:
            removed.append("; ".join(dropped))
        if not surviving:
            continue
        rebuilt = _DANGLING_TAIL_RE.sub("", ", ".join(surviving)).strip()
        if rebuilt:
            kept.append(rebuilt)
    return NegationResult(kept=tuple(kept), removed=tuple(removed))
