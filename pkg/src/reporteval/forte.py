"""Four-category keyword F1 scoring with synonym normalization.

A keyword bank maps surface terms to one representative per synonym group,
per category (degree, landmark, feature, impression). Extraction is
case-insensitive word-boundary matching over item text, longest surface
first within each category so nested surfaces ("internal carotid arteries"
vs "artery") are not double counted. Categories match independently.

The shipped default bank is a verbatim transcription of the brain-CT
keyword table this toolkit targets; any domain can substitute its own bank
file (same JSON schema) to reuse the category concept.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Optional, Sequence

from .corpus import (
    FORTE_CATEGORIES,
    EvalCase,
    ForteCategoryScore,
    Report,
    Variant,
    remove_negations,
)
from .textproc import NegationConfig

__all__ = [
    "BankError",
    "SynonymGroup",
    "KeywordBank",
    "ForteExtraction",
    "load_bank",
    "default_bank",
    "extract",
    "forte_f1",
    "forte_corpus",
    "ForteCaseScore",
    "ForteCorpusSummary",
]


class BankError(Exception):
    """Invalid keyword bank definition."""


@dataclass(frozen=True)
class SynonymGroup:
    representative: str
    surfaces: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.surfaces:
            raise BankError(f"group {self.representative!r} has no surfaces")
        if self.representative not in self.surfaces:
            raise BankError(
                f"representative {self.representative!r} missing from its surfaces"
            )


def _surface_pattern(surface: str) -> re.Pattern:
    # Multiword surfaces tolerate any whitespace run between words.
    words = [re.escape(w) for w in surface.split()]
    return re.compile(r"\b" + r"\s+".join(words) + r"\b", re.IGNORECASE)


class KeywordBank:
    """Validated category -> synonym-group ontology, immutable after load."""

    def __init__(self, categories: Mapping[str, Sequence[SynonymGroup]], version: str = ""):
        self.version = version
        self.categories: dict[str, tuple[SynonymGroup, ...]] = {}
        for cat in FORTE_CATEGORIES:
            self.categories[cat] = tuple(categories.get(cat, ()))
        unknown = set(categories) - set(FORTE_CATEGORIES)
        if unknown:
            raise BankError(f"unknown categories: {sorted(unknown)}")
        self._validate()
        self._matchers = self._build_matchers(self.categories)

    def _validate(self) -> None:
        for cat, groups in self.categories.items():
            owner: dict[str, str] = {}
            reps: set[str] = set()
            for group in groups:
                if group.representative in reps:
                    raise BankError(
                        f"{cat}: duplicate representative {group.representative!r}"
                    )
                reps.add(group.representative)
                for surface in group.surfaces:
                    if surface != surface.lower():
                        raise BankError(f"{cat}: surface {surface!r} must be lowercase")
                    if surface in owner:
                        raise BankError(
                            f"{cat}: surface {surface!r} appears in groups "
                            f"{owner[surface]!r} and {group.representative!r}"
                        )
                    owner[surface] = group.representative
        if all(not groups for groups in self.categories.values()):
            raise BankError("bank defines no groups")

    @staticmethod
    def _build_matchers(
        categories: Mapping[str, Sequence[SynonymGroup]],
    ) -> list[tuple[re.Pattern, str, str]]:
        surfaces = [
            (surface, cat, group.representative)
            for cat, groups in categories.items()
            for group in groups
            for surface in group.surfaces
        ]
        # Longest first across all categories: more words, then more
        # characters, then alphabetical; category last for determinism.
        surfaces.sort(key=lambda s: (-len(s[0].split()), -len(s[0]), s[0], s[1]))
        return [(_surface_pattern(surface), cat, rep) for surface, cat, rep in surfaces]

    def representatives(self, category: str) -> set[str]:
        return {g.representative for g in self.categories[category]}

    def surfaces(self, category: str) -> list[str]:
        return [s for g in self.categories[category] for s in g.surfaces]

    def match_item(self, text: str) -> dict[str, set[str]]:
        """Representatives found per category in one item text.

        Longest surface wins across categories ("subdural hematoma" blocks
        the nested "subdural" and "hematoma"); a span already consumed only
        yields again to an exact-equal span, so a surface shared verbatim by
        two categories credits both.
        """
        found: dict[str, set[str]] = {cat: set() for cat in FORTE_CATEGORIES}
        consumed: list[tuple[int, int]] = []
        for pattern, cat, rep in self._matchers:
            for m in pattern.finditer(text):
                span = (m.start(), m.end())
                if any(span != other and span[0] < other[1] and other[0] < span[1] for other in consumed):
                    continue
                if span not in consumed:
                    consumed.append(span)
                found[cat].add(rep)
        return found


@dataclass(frozen=True)
class ForteExtraction:
    """Representatives found per category in one report."""

    degree: frozenset[str]
    landmark: frozenset[str]
    feature: frozenset[str]
    impression: frozenset[str]

    def category(self, name: str) -> frozenset[str]:
        return getattr(self, name)


def _parse_groups(raw: object, category: str) -> list[SynonymGroup]:
    if not isinstance(raw, list):
        raise BankError(f"{category}: expected a list of groups")
    groups = []
    for entry in raw:
        if not isinstance(entry, dict) or "representative" not in entry or "surfaces" not in entry:
            raise BankError(f"{category}: each group needs representative and surfaces")
        groups.append(
            SynonymGroup(
                representative=str(entry["representative"]).lower(),
                surfaces=tuple(str(s).lower() for s in entry["surfaces"]),
            )
        )
    return groups


def load_bank(path: str) -> KeywordBank:
    """Load and validate a bank JSON file: {category: [{representative, surfaces}]}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return _bank_from_dict(data)


def _bank_from_dict(data: Mapping[str, object]) -> KeywordBank:
    version = str(data.get("version", ""))
    categories = {
        key: _parse_groups(value, key) for key, value in data.items() if key != "version"
    }
    return KeywordBank(categories, version=version)


def default_bank() -> KeywordBank:
    """The shipped brain-CT bank."""
    text = resources.files("reporteval.data").joinpath("forte_bank_default.json").read_text()
    return _bank_from_dict(json.loads(text))


def extract(report: Report, bank: KeywordBank) -> ForteExtraction:
    """Set of normalized representatives per category found in the report."""
    sets: dict[str, set[str]] = {cat: set() for cat in FORTE_CATEGORIES}
    for item in report.items:
        for cat, reps in bank.match_item(item.text).items():
            sets[cat] |= reps
    return ForteExtraction(**{cat: frozenset(sets[cat]) for cat in FORTE_CATEGORIES})


def forte_f1(
    candidate_extract: ForteExtraction, reference_extract: ForteExtraction
) -> dict[str, ForteCategoryScore]:
    """Per-category precision/recall/F1 of candidate vs reference sets.

    Both sets empty -> N/A (None everywhere, excluded from averages);
    exactly one empty -> 0.
    """
    out: dict[str, ForteCategoryScore] = {}
    for cat in FORTE_CATEGORIES:
        c = candidate_extract.category(cat)
        g = reference_extract.category(cat)
        if not c and not g:
            out[cat] = ForteCategoryScore(None, None, None)
            continue
        if not c or not g:
            out[cat] = ForteCategoryScore(0.0, 0.0, 0.0)
            continue
        hit = len(c & g)
        precision = hit / len(c)
        recall = hit / len(g)
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        out[cat] = ForteCategoryScore(precision, recall, f1)
    return out


def score_case_forte(
    case: EvalCase,
    bank: KeywordBank,
    variant: Variant = Variant.REPORT_LEVEL,
    negation: NegationConfig | None = None,
) -> dict[str, ForteCategoryScore]:
    """Category scores for one case; the negation-removed variant extracts
    after negation removal on both sides."""
    candidate, reference = case.candidate, case.reference
    if variant is Variant.NEGATION_REMOVED:
        candidate = remove_negations(candidate, negation).report
        reference = remove_negations(reference, negation).report
    return forte_f1(extract(candidate, bank), extract(reference, bank))


@dataclass(frozen=True)
class ForteCaseScore:
    case_id: str
    categories: Mapping[str, ForteCategoryScore]

    @property
    def average(self) -> Optional[float]:
        defined = [s.f1 for s in self.categories.values() if s.f1 is not None]
        return sum(defined) / len(defined) if defined else None


@dataclass(frozen=True)
class ForteCorpusSummary:
    n_cases: int
    category_means: Mapping[str, Optional[float]]
    cases: tuple[ForteCaseScore, ...] = field(default_factory=tuple, repr=False)

    @property
    def average(self) -> Optional[float]:
        defined = [v for v in self.category_means.values() if v is not None]
        return sum(defined) / len(defined) if defined else None


def forte_corpus(
    cases: Sequence[EvalCase],
    bank: KeywordBank,
    variant: Variant = Variant.REPORT_LEVEL,
    negation: NegationConfig | None = None,
) -> ForteCorpusSummary:
    """Per-category mean F1 over cases with defined values, plus the average."""
    if not cases:
        raise ValueError("forte_corpus requires at least one case")
    case_scores = [
        ForteCaseScore(case.case_id, score_case_forte(case, bank, variant, negation))
        for case in cases
    ]
    means: dict[str, Optional[float]] = {}
    for cat in FORTE_CATEGORIES:
        defined = [cs.categories[cat].f1 for cs in case_scores if cs.categories[cat].f1 is not None]
        means[cat] = sum(defined) / len(defined) if defined else None
    return ForteCorpusSummary(n_cases=len(cases), category_means=means, cases=tuple(case_scores))
