"""Variant scoring pipeline: orchestrates pairing, metrics, and keyword F1.

Variants:
  report_level     whole reports scored as single token sequences
  sentence_paired  candidate items matched to reference items, per-pair
                   scores averaged per case
  negation_removed builds on sentence pairing: items are paired on the
                   original reports, then negated clauses are trimmed from
                   both sides of each pair and pairs with an emptied side
                   are dropped; keyword extraction likewise runs on the
                   negation-trimmed reports

The consensus (CIDEr-R) idf table is built once per corpus and variant from
that variant's reference units: whole reports at report level, reference
sentences (negation-trimmed for the negation variant) otherwise. Scoring
across cases is read-only after that. Note a TF-IDF consensus score needs
corpus context: on a single-case corpus every reference n-gram has df = N,
all idf weights vanish, and the score is degenerately 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import forte as forte_mod
from . import metrics as metrics_mod
from .corpus import EvalCase, Report, ScoreRecord, Variant, remove_negations
from .metrics import IdfTable, MetricConfig
from .pairing import FallbackEmbedder, PairingError, pair_sentences
from .textproc import NegationConfig, remove_negation_texts, tokenize

__all__ = ["ScoringResult", "SkipRecord", "score_corpus", "score_case", "summarize", "SummaryRow"]


@dataclass(frozen=True)
class SkipRecord:
    case_id: str
    reason: str


@dataclass(frozen=True)
class ScoringResult:
    variant: Variant
    records: tuple[ScoreRecord, ...]
    skipped: tuple[SkipRecord, ...] = field(default_factory=tuple)

    def record_for(self, case_id: str) -> Optional[ScoreRecord]:
        for record in self.records:
            if record.case_id == case_id:
                return record
        return None


@dataclass(frozen=True)
class _CaseUnits:
    case: EvalCase
    units: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    # Reports the keyword extraction should see (negation-trimmed for the
    # negation variant, the originals otherwise).
    forte_candidate: Report
    forte_reference: Report


def _trim_item(text: str, negation: NegationConfig | None) -> Optional[tuple[str, ...]]:
    kept = remove_negation_texts([text], negation).kept
    if not kept:
        return None
    tokens = tuple(tokenize(kept[0]))
    return tokens or None


def _case_units(
    case: EvalCase, variant: Variant, provider, negation: NegationConfig | None
) -> Optional[_CaseUnits]:
    """Scoring units for one case, or None when every pair drops out."""
    if variant is Variant.REPORT_LEVEL:
        return _CaseUnits(
            case,
            ((tuple(case.candidate.tokens), tuple(case.reference.tokens)),),
            case.candidate,
            case.reference,
        )
    assignment = pair_sentences(case.candidate, case.reference, provider)
    units = []
    for ci, ri, _ in assignment.pairs:
        cand_item = case.candidate.items[ci]
        ref_item = case.reference.items[ri]
        if variant is Variant.SENTENCE_PAIRED:
            units.append((cand_item.tokens, ref_item.tokens))
            continue
        cand_tokens = _trim_item(cand_item.text, negation)
        ref_tokens = _trim_item(ref_item.text, negation)
        if cand_tokens is None or ref_tokens is None:
            continue
        units.append((cand_tokens, ref_tokens))
    if not units:
        return None
    if variant is Variant.NEGATION_REMOVED:
        return _CaseUnits(
            case,
            tuple(units),
            remove_negations(case.candidate, negation).report,
            remove_negations(case.reference, negation).report,
        )
    return _CaseUnits(case, tuple(units), case.candidate, case.reference)


def _build_units(
    cases: Sequence[EvalCase], variant: Variant, provider, negation: NegationConfig | None
) -> tuple[list[_CaseUnits], list[SkipRecord]]:
    prepared: list[_CaseUnits] = []
    skipped: list[SkipRecord] = []
    for case in cases:
        try:
            cu = _case_units(case, variant, provider, negation)
        except PairingError as exc:
            skipped.append(SkipRecord(case.case_id, str(exc)))
            continue
        if cu is None:
            skipped.append(SkipRecord(case.case_id, "no pair survived negation removal"))
            continue
        prepared.append(cu)
    return prepared, skipped


def _reference_units(
    cases: Sequence[EvalCase], variant: Variant, negation: NegationConfig | None
) -> list[tuple[str, ...]]:
    units: list[tuple[str, ...]] = []
    for case in cases:
        if variant is Variant.REPORT_LEVEL:
            units.append(tuple(case.reference.tokens))
        elif variant is Variant.SENTENCE_PAIRED:
            units.extend(item.tokens for item in case.reference.items)
        else:
            trimmed = remove_negation_texts(case.reference.item_texts, negation).kept
            units.extend(tuple(tokenize(t)) for t in trimmed if tokenize(t))
    return units


def _default_provider(cases: Sequence[EvalCase]) -> FallbackEmbedder:
    sentences: list[str] = []
    for case in cases:
        sentences.extend(item.text for item in case.candidate.items)
        sentences.extend(item.text for item in case.reference.items)
    return FallbackEmbedder.fit(sentences)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def score_corpus(
    cases: Sequence[EvalCase],
    variant: Variant,
    provider=None,
    config: MetricConfig | None = None,
    bank: forte_mod.KeywordBank | None = None,
    negation: NegationConfig | None = None,
) -> ScoringResult:
    """Score every case under one variant.

    Cases that cannot be paired (an empty side) or whose every pair drops
    out under negation removal are skipped, excluded from corpus means, and
    reported in the skip list.
    """
    config = config or MetricConfig()
    bank = bank or forte_mod.default_bank()
    if provider is None and variant is not Variant.REPORT_LEVEL:
        provider = _default_provider(cases)
    prepared, skipped = _build_units(cases, variant, provider, negation)
    if not prepared:
        return ScoringResult(variant=variant, records=(), skipped=tuple(skipped))
    reference_units = _reference_units([cu.case for cu in prepared], variant, negation)
    idf = IdfTable.from_reference_units(reference_units, max_n=config.cider_n)
    records = tuple(_score_prepared(cu, variant, idf, config, bank) for cu in prepared)
    return ScoringResult(variant=variant, records=records, skipped=tuple(skipped))


def _score_prepared(
    cu: _CaseUnits,
    variant: Variant,
    idf: IdfTable,
    config: MetricConfig,
    bank: forte_mod.KeywordBank,
) -> ScoreRecord:
    bleu_scores = {n: [] for n in range(1, config.bleu_max_n + 1)}
    meteor_scores, rouge_scores, cider_scores = [], [], []
    for cand, ref in cu.units:
        for n in bleu_scores:
            bleu_scores[n].append(metrics_mod.bleu(cand, ref, n))
        meteor_scores.append(metrics_mod.meteor(cand, ref, config))
        rouge_scores.append(metrics_mod.rouge_l(cand, ref, config.rouge_beta))
        cider_scores.append(metrics_mod.cider_r_case(cand, ref, idf, config))
    forte_scores = forte_mod.forte_f1(
        forte_mod.extract(cu.forte_candidate, bank),
        forte_mod.extract(cu.forte_reference, bank),
    )
    return ScoreRecord(
        case_id=cu.case.case_id,
        variant=variant,
        bleu1=_mean(bleu_scores[1]),
        bleu2=_mean(bleu_scores[2]),
        bleu3=_mean(bleu_scores[3]),
        bleu4=_mean(bleu_scores[4]),
        meteor=_mean(meteor_scores),
        rouge_l=_mean(rouge_scores),
        cider_r=_mean(cider_scores),
        forte=forte_scores,
    )


def score_case(
    case: EvalCase,
    variant: Variant = Variant.REPORT_LEVEL,
    provider=None,
    config: MetricConfig | None = None,
    bank: forte_mod.KeywordBank | None = None,
    negation: NegationConfig | None = None,
    idf: IdfTable | None = None,
) -> ScoreRecord:
    """Score one case; raises PairingError if no scorable pair exists.

    Without a prebuilt idf table the case is treated as a one-case corpus,
    which leaves CIDEr-R degenerate (see module docstring).
    """
    config = config or MetricConfig()
    bank = bank or forte_mod.default_bank()
    if provider is None and variant is not Variant.REPORT_LEVEL:
        provider = _default_provider([case])
    prepared, skipped = _build_units([case], variant, provider, negation)
    if skipped:
        raise PairingError(skipped[0].reason)
    if idf is None:
        idf = IdfTable.from_reference_units(
            _reference_units([case], variant, negation), max_n=config.cider_n
        )
    return _score_prepared(prepared[0], variant, idf, config, bank)


@dataclass(frozen=True)
class SummaryRow:
    model_tag: str
    variant: Variant
    n_cases: int
    means: dict


_SUMMARY_METRICS = ("bleu1", "bleu2", "bleu3", "bleu4", "meteor", "rouge_l", "cider_r")


def summarize(cases: Sequence[EvalCase], results: Sequence[ScoringResult]) -> list[SummaryRow]:
    """Corpus means per model tag and variant (table layout: rows = models x
    variants, columns = metrics)."""
    tags = {case.case_id: case.candidate.model_tag or "unknown" for case in cases}
    rows: list[SummaryRow] = []
    for result in results:
        by_tag: dict[str, list[ScoreRecord]] = {}
        for record in result.records:
            by_tag.setdefault(tags.get(record.case_id, "unknown"), []).append(record)
        for tag in sorted(by_tag):
            records = by_tag[tag]
            means = {m: _mean([getattr(r, m) for r in records]) for m in _SUMMARY_METRICS}
            for cat in forte_mod.FORTE_CATEGORIES:
                defined = [
                    r.forte[cat].f1
                    for r in records
                    if cat in r.forte and r.forte[cat].f1 is not None
                ]
                means[f"forte_{cat}"] = _mean(defined) if defined else None
            defined_cats = [
                means[f"forte_{cat}"]
                for cat in forte_mod.FORTE_CATEGORIES
                if means[f"forte_{cat}"] is not None
            ]
            means["forte_average"] = _mean(defined_cats) if defined_cats else None
            rows.append(
                SummaryRow(model_tag=tag, variant=result.variant, n_cases=len(records), means=means)
            )
    return rows
