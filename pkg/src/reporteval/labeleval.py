"""Negation-aware mention detection against majority-rule binary labels.

The default concept lexicons are curated from the brain-CT feature
vocabulary this toolkit ships; matching rules are deliberately simple
(word-boundary surface search) and every lexicon is config-overridable.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Concept, LabelRecord, Report, remove_negations
from .textproc import NegationConfig

logger = logging.getLogger(__name__)

__all__ = ["ConceptLexicon", "DEFAULT_LEXICONS", "mention", "concept_accuracy", "AccuracyResult"]


@dataclass(frozen=True)
class ConceptLexicon:
    concept: Concept
    surfaces: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.surfaces:
            raise ValueError(f"lexicon for {self.concept} has no surfaces")
        bad = [s for s in self.surfaces if s != s.lower() or not s.strip()]
        if bad:
            raise ValueError(f"lexicon surfaces must be nonempty lowercase: {bad}")

    def pattern(self) -> re.Pattern:
        parts = [r"\s+".join(re.escape(w) for w in s.split()) for s in self.surfaces]
        return re.compile(r"\b(?:%s)\b" % "|".join(parts), re.IGNORECASE)


DEFAULT_LEXICONS: dict[Concept, ConceptLexicon] = {
    Concept.MASS_EFFECT: ConceptLexicon(
        Concept.MASS_EFFECT, ("mass effect", "space occupying lesion")
    ),
    Concept.HEMORRHAGE: ConceptLexicon(
        Concept.HEMORRHAGE,
        (
            "hemorrhage",
            "hematoma",
            "sdh",
            "sah",
            "edh",
            "ivh",
            "subdural",
            "subarachnoid",
            "epidural",
            "intraventricular",
            "intracerebral hemorrhage",
            "contusion",
        ),
    ),
    Concept.MIDLINE_SHIFT: ConceptLexicon(
        Concept.MIDLINE_SHIFT, ("midline shift", "midline shifting", "shift to")
    ),
}


def mention(
    report: Report,
    lexicon: ConceptLexicon,
    negation_aware: bool = True,
    negation: NegationConfig | None = None,
) -> bool:
    """True when a lexicon surface survives in the report.

    With negation_aware, negation removal runs first so "no midline shift"
    does not count as a midline-shift mention.
    """
    if negation_aware:
        report = remove_negations(report, negation).report
    pattern = lexicon.pattern()
    return any(pattern.search(item.text) for item in report.items)


@dataclass(frozen=True)
class AccuracyResult:
    concept: Concept
    accuracy: float
    tp: int
    tn: int
    fp: int
    fn: int
    skipped: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def concept_accuracy(
    reports: Mapping[str, Report],
    labels: Sequence[LabelRecord],
    lexicon: ConceptLexicon,
    negation_aware: bool = True,
    negation: NegationConfig | None = None,
) -> AccuracyResult:
    """Accuracy of mention-based predictions against majority labels.

    Labeled scans without a report are skipped with a warning (data error,
    not a model error) and listed in the result.
    """
    tp = tn = fp = fn = 0
    skipped: list[str] = []
    for label in labels:
        if label.concept is not lexicon.concept:
            continue
        report = reports.get(label.scan_id)
        if report is None:
            skipped.append(label.scan_id)
            continue
        predicted = mention(report, lexicon, negation_aware, negation)
        if predicted and label.majority:
            tp += 1
        elif predicted:
            fp += 1
        elif label.majority:
            fn += 1
        else:
            tn += 1
    if skipped:
        logger.warning(
            "%s: no report for %d labeled scan(s): %s",
            lexicon.concept.value,
            len(skipped),
            ", ".join(skipped[:5]),
        )
    total = tp + tn + fp + fn
    if total == 0:
        raise ValueError(f"no scorable labels for concept {lexicon.concept.value}")
    return AccuracyResult(
        concept=lexicon.concept,
        accuracy=(tp + tn) / total,
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
        skipped=tuple(skipped),
    )
