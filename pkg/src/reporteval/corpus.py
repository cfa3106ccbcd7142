"""Data model and ingestion/serialization for report pairs, labels, and scores.

Interchange formats:
  corpus JSONL/CSV: case_id, candidate_text, reference_text, model_tag?
  label CSV:        scan_id, <concept>_r1, <concept>_r2, <concept>_r3 (0/1)
  score CSV/JSON:   fixed column order, 2-decimal values, "# meta:" header

All domain types are immutable after construction and safe to share across
concurrent workers; the loaders themselves are single-threaded.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from . import textproc
from .textproc import NegationConfig

logger = logging.getLogger(__name__)

__all__ = [
    "Source",
    "Variant",
    "Concept",
    "SentenceItem",
    "Report",
    "EvalCase",
    "LabelRecord",
    "ForteCategoryScore",
    "ScoreRecord",
    "CorpusError",
    "RecordError",
    "CorpusLoadResult",
    "load_corpus",
    "load_labels",
    "write_scores",
    "read_scores",
    "remove_negations",
    "ReportNegation",
]


class Source(str, Enum):
    HUMAN = "human"
    MODEL = "model"


class Variant(str, Enum):
    REPORT_LEVEL = "report_level"
    SENTENCE_PAIRED = "sentence_paired"
    NEGATION_REMOVED = "negation_removed"


class Concept(str, Enum):
    MASS_EFFECT = "mass_effect"
    HEMORRHAGE = "hemorrhage"
    MIDLINE_SHIFT = "midline_shift"


class CorpusError(Exception):
    """Fatal corpus problem (unreadable file, duplicate case id)."""


@dataclass(frozen=True)
class RecordError:
    """A single bad record, kept instead of aborting when strict=False."""

    line: int
    message: str


@dataclass(frozen=True)
class SentenceItem:
    index: int
    text: str
    tokens: tuple[str, ...]
    negated: bool = False


@dataclass(frozen=True)
class Report:
    """One radiology report decomposed into itemized sentences.

    `items` is always the canonical itemization of `raw_text`; construct via
    `Report.from_text` so the invariant holds.
    """

    id: str
    source: Source
    raw_text: str
    items: tuple[SentenceItem, ...]
    model_tag: Optional[str] = None

    @classmethod
    def from_text(
        cls,
        id: str,
        source: Source,
        raw_text: str,
        model_tag: Optional[str] = None,
    ) -> "Report":
        if not id:
            raise ValueError("report id must be nonempty")
        items = tuple(
            SentenceItem(index=i, text=t, tokens=tuple(textproc.tokenize(t)))
            for i, t in enumerate(textproc.itemize_texts(raw_text))
        )
        return cls(id=id, source=Source(source), raw_text=raw_text, items=items, model_tag=model_tag)

    @property
    def item_texts(self) -> list[str]:
        return [it.text for it in self.items]

    @property
    def tokens(self) -> list[str]:
        """Whole-report token sequence (items concatenated in order)."""
        out: list[str] = []
        for it in self.items:
            out.extend(it.tokens)
        return out


@dataclass(frozen=True)
class EvalCase:
    case_id: str
    candidate: Report
    reference: Report

    def __post_init__(self) -> None:
        if self.candidate.source is not Source.MODEL:
            raise ValueError(f"case {self.case_id}: candidate must have source=model")
        if self.reference.source is not Source.HUMAN:
            raise ValueError(f"case {self.case_id}: reference must have source=human")


@dataclass(frozen=True)
class ReportNegation:
    """Negation-removed report plus the deleted items, flagged for audit."""

    report: Report
    removed: tuple[SentenceItem, ...]


def remove_negations(report: Report, config: NegationConfig | None = None) -> ReportNegation:
    """Apply negation removal to a report; see textproc.remove_negation_texts."""
    result = textproc.remove_negation_texts(report.item_texts, config)
    cleaned = Report.from_text(
        id=report.id,
        source=report.source,
        raw_text=textproc.join_items(result.kept),
        model_tag=report.model_tag,
    )
    removed = tuple(
        SentenceItem(index=i, text=t, tokens=tuple(textproc.tokenize(t)), negated=True)
        for i, t in enumerate(result.removed)
    )
    return ReportNegation(report=cleaned, removed=removed)


@dataclass(frozen=True)
class LabelRecord:
    scan_id: str
    concept: Concept
    rater_votes: tuple[bool, ...]
    majority: bool = field(init=False)

    def __post_init__(self) -> None:
        if not self.rater_votes:
            raise ValueError(f"scan {self.scan_id}: rater_votes must be nonempty")
        # Majority rule: true iff strictly more than half of the votes are true.
        object.__setattr__(self, "majority", sum(self.rater_votes) * 2 > len(self.rater_votes))


@dataclass(frozen=True)
class ForteCategoryScore:
    """Precision/recall/F1 for one keyword category; None means N/A."""

    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]


FORTE_CATEGORIES = ("degree", "landmark", "feature", "impression")


@dataclass(frozen=True)
class ScoreRecord:
    case_id: str
    variant: Variant
    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    meteor: float
    rouge_l: float
    cider_r: float
    forte: Mapping[str, ForteCategoryScore] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("bleu1", "bleu2", "bleu3", "bleu4", "meteor", "rouge_l"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"case {self.case_id}: {name}={v} outside [0, 100]")
        if not 0.0 <= self.cider_r <= 1000.0:
            raise ValueError(f"case {self.case_id}: cider_r={self.cider_r} outside [0, 1000]")
        for cat, score in self.forte.items():
            for v in (score.precision, score.recall, score.f1):
                if v is not None and not 0.0 <= v <= 1.0:
                    raise ValueError(f"case {self.case_id}: forte {cat} value {v} outside [0, 1]")

    @property
    def forte_average(self) -> Optional[float]:
        """Mean of the defined (non-N/A) category F1 values."""
        defined = [s.f1 for s in self.forte.values() if s.f1 is not None]
        if not defined:
            return None
        return sum(defined) / len(defined)


@dataclass(frozen=True)
class CorpusLoadResult:
    cases: tuple[EvalCase, ...]
    errors: tuple[RecordError, ...] = field(default_factory=tuple)


_REQUIRED_FIELDS = ("case_id", "candidate_text", "reference_text")


def _case_from_record(record: Mapping[str, object], line: int) -> EvalCase:
    missing = [f for f in _REQUIRED_FIELDS if not record.get(f)]
    if missing:
        raise ValueError(f"line {line}: missing field(s) {', '.join(missing)}")
    case_id = str(record["case_id"])
    model_tag = record.get("model_tag") or None
    candidate = Report.from_text(
        id=f"{case_id}/candidate",
        source=Source.MODEL,
        raw_text=str(record["candidate_text"]),
        model_tag=str(model_tag) if model_tag else None,
    )
    reference = Report.from_text(
        id=f"{case_id}/reference", source=Source.HUMAN, raw_text=str(record["reference_text"])
    )
    return EvalCase(case_id=case_id, candidate=candidate, reference=reference)


def _iter_records(path: str, fmt: str) -> Iterable[tuple[int, Mapping[str, object] | None, str | None]]:
    """Yield (line_number, record, parse_error) triples."""
    if fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield line_no, json.loads(line), None
                except json.JSONDecodeError as exc:
                    yield line_no, None, f"line {line_no}: invalid JSON ({exc.msg})"
    elif fmt == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for line_no, row in enumerate(reader, start=2):
                yield line_no, row, None
    else:
        raise ValueError(f"unknown corpus format {fmt!r} (expected jsonl or csv)")


def infer_format(path: str) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "jsonl"


def load_corpus(path: str, fmt: str | None = None, strict: bool = True) -> CorpusLoadResult:
    """Load EvalCases from a JSONL or CSV file.

    strict=True raises on the first bad record; strict=False records the
    error and keeps going. Duplicate case_id is always fatal because silent
    deduplication would corrupt corpus-level statistics.
    """
    fmt = fmt or infer_format(path)
    cases: list[EvalCase] = []
    errors: list[RecordError] = []
    seen: set[str] = set()
    for line_no, record, parse_error in _iter_records(path, fmt):
        message = parse_error
        if message is None:
            try:
                case = _case_from_record(record, line_no)
            except ValueError as exc:
                message = str(exc)
            else:
                if case.case_id in seen:
                    raise CorpusError(f"duplicate case_id {case.case_id!r} at line {line_no}")
                seen.add(case.case_id)
                cases.append(case)
                continue
        if strict:
            raise CorpusError(message)
        errors.append(RecordError(line=line_no, message=message))
    if not cases and not errors:
        logger.warning("corpus file %s contained no records", path)
    return CorpusLoadResult(cases=tuple(cases), errors=tuple(errors))


# ---------------------------------------------------------------------------
# Labels (majority-rule rater votes)
# ---------------------------------------------------------------------------


def load_labels(path: str, strict: bool = True) -> tuple[list[LabelRecord], list[RecordError]]:
    """Load majority-rule labels from a rater-vote CSV.

    Expects a scan_id column plus <concept>_r1..<concept>_rK 0/1 columns for
    each concept present. Non-binary vote values are record-level errors.
    """
    records: list[LabelRecord] = []
    errors: list[RecordError] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "scan_id" not in reader.fieldnames:
            raise CorpusError(f"label file {path} must have a scan_id column")
        concept_columns: dict[Concept, list[str]] = {}
        for concept in Concept:
            cols = sorted(c for c in reader.fieldnames if c.startswith(concept.value + "_r"))
            if cols:
                concept_columns[concept] = cols
        for line_no, row in enumerate(reader, start=2):
            scan_id = (row.get("scan_id") or "").strip()
            if not scan_id:
                err = RecordError(line=line_no, message=f"line {line_no}: missing scan_id")
                if strict:
                    raise CorpusError(err.message)
                errors.append(err)
                continue
            for concept, cols in concept_columns.items():
                try:
                    votes = tuple(_parse_vote(row.get(c, ""), c) for c in cols)
                except ValueError as exc:
                    err = RecordError(line=line_no, message=f"line {line_no}: {exc}")
                    if strict:
                        raise CorpusError(err.message)
                    errors.append(err)
                    continue
                records.append(LabelRecord(scan_id=scan_id, concept=concept, rater_votes=votes))
    return records, errors


def _parse_vote(value: object, column: str) -> bool:
    text = str(value).strip().lower()
    if text in {"0", "false"}:
        return False
    if text in {"1", "true"}:
        return True
    raise ValueError(f"non-binary vote {value!r} in column {column}")


# ---------------------------------------------------------------------------
# Score serialization
# ---------------------------------------------------------------------------

_SCORE_COLUMNS = (
    "case_id",
    "variant",
    "bleu1",
    "bleu2",
    "bleu3",
    "bleu4",
    "meteor",
    "rouge_l",
    "cider_r",
    "forte_degree_p",
    "forte_degree_r",
    "forte_degree_f1",
    "forte_landmark_p",
    "forte_landmark_r",
    "forte_landmark_f1",
    "forte_feature_p",
    "forte_feature_r",
    "forte_feature_f1",
    "forte_impression_p",
    "forte_impression_r",
    "forte_impression_f1",
    "forte_average",
)


def _fmt(value: Optional[float]) -> str:
    # Scores are serialized at 2 decimal places, matching table precision.
    if value is None:
        return "N/A"
    return f"{value:.2f}"


def _record_row(record: ScoreRecord) -> dict[str, str]:
    row = {
        "case_id": record.case_id,
        "variant": record.variant.value,
        "bleu1": _fmt(record.bleu1),
        "bleu2": _fmt(record.bleu2),
        "bleu3": _fmt(record.bleu3),
        "bleu4": _fmt(record.bleu4),
        "meteor": _fmt(record.meteor),
        "rouge_l": _fmt(record.rouge_l),
        "cider_r": _fmt(record.cider_r),
        "forte_average": _fmt(record.forte_average),
    }
    for cat in FORTE_CATEGORIES:
        score = record.forte.get(cat, ForteCategoryScore(None, None, None))
        row[f"forte_{cat}_p"] = _fmt(score.precision)
        row[f"forte_{cat}_r"] = _fmt(score.recall)
        row[f"forte_{cat}_f1"] = _fmt(score.f1)
    return row


def write_scores(
    records: Sequence[ScoreRecord],
    path: str,
    fmt: str = "csv",
    metadata: Mapping[str, object] | None = None,
) -> None:
    """Write score records with a fixed field order and 2-decimal formatting.

    Output is bit-stable for identical inputs. Metadata (run configuration,
    toolkit version) is embedded as a "# meta:" comment line in CSV or a
    "metadata" object in JSON.
    """
    meta_json = json.dumps(dict(metadata or {}), sort_keys=True)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# meta: {meta_json}\n")
        writer = csv.DictWriter(buf, fieldnames=_SCORE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(_record_row(record))
        payload = buf.getvalue()
    elif fmt == "json":
        payload = json.dumps(
            {"metadata": dict(metadata or {}), "records": [_record_row(r) for r in records]},
            indent=2,
            sort_keys=True,
        )
        payload += "\n"
    else:
        raise ValueError(f"unknown score format {fmt!r} (expected csv or json)")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        raise CorpusError(f"cannot write scores to {path}: {exc}") from exc


def _parse_score(text: str) -> Optional[float]:
    if text == "N/A":
        return None
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN score")
    return value


def read_scores(path: str, fmt: str | None = None) -> tuple[list[dict], dict]:
    """Read rows written by write_scores; returns (rows, metadata).

    Rows come back as dicts with floats (None for N/A) so statistical
    consumers (utest, corr) can operate column-wise.
    """
    if fmt is None:
        fmt = "json" if str(path).lower().endswith(".json") else "csv"
    if fmt == "json":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        raw_rows = data.get("records", [])
        metadata = data.get("metadata", {})
    else:
        metadata = {}
        with open(path, encoding="utf-8", newline="") as fh:
            while True:
                pos = fh.tell()
                line = fh.readline()
                if line.startswith("# meta:"):
                    metadata = json.loads(line[len("# meta:") :])
                    continue
                fh.seek(pos)
                break
            raw_rows = list(csv.DictReader(fh))
    rows = []
    for raw in raw_rows:
        row: dict[str, object] = {}
        for key, value in raw.items():
            if key in ("case_id", "variant"):
                row[key] = value
            else:
                row[key] = _parse_score(str(value))
        rows.append(row)
    return rows, metadata


def records_from_rows(rows: Sequence[Mapping[str, object]]) -> list[ScoreRecord]:
    """Rebuild ScoreRecords from read_scores rows (round-trip helper)."""
    records = []
    for row in rows:
        forte = {}
        for cat in FORTE_CATEGORIES:
            forte[cat] = ForteCategoryScore(
                precision=row.get(f"forte_{cat}_p"),
                recall=row.get(f"forte_{cat}_r"),
                f1=row.get(f"forte_{cat}_f1"),
            )
        records.append(
            ScoreRecord(
                case_id=str(row["case_id"]),
                variant=Variant(str(row["variant"])),
                bleu1=float(row["bleu1"]),
                bleu2=float(row["bleu2"]),
                bleu3=float(row["bleu3"]),
                bleu4=float(row["bleu4"]),
                meteor=float(row["meteor"]),
                rouge_l=float(row["rouge_l"]),
                cider_r=float(row["cider_r"]),
                forte=forte,
            )
        )
    return records
