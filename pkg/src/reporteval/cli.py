"""Command-line entry point: one subcommand per analysis pipeline.

Every output file embeds the resolved run configuration and toolkit version
in its metadata header; identical config and inputs produce byte-identical
outputs (any shuffling is governed by --seed).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from . import __version__
from . import forte as forte_mod
from . import pipeline, stats
from .corpus import (
    Concept,
    CorpusError,
    Report,
    Source,
    Variant,
    load_corpus,
    load_labels,
    read_scores,
    write_scores,
)
from .labeleval import DEFAULT_LEXICONS, concept_accuracy
from .metrics import CiderSigmaMode, MetricConfig
from .pairing import build_provider
from .textproc import NegationConfig, NegationMode

logger = logging.getLogger(__name__)

_VARIANT_ALIASES = {
    "report": Variant.REPORT_LEVEL,
    "paired": Variant.SENTENCE_PAIRED,
    "negremoved": Variant.NEGATION_REMOVED,
}

_METRIC_COLUMNS = {
    "bleu": ("bleu1", "bleu2", "bleu3", "bleu4"),
    "meteor": ("meteor",),
    "rouge": ("rouge_l",),
    "cider": ("cider_r",),
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved options for one invocation; serialized into output metadata."""

    command: str
    corpus: Optional[str] = None
    variants: tuple[str, ...] = ()
    embedder: str = "fallback"
    negation_mode: str = NegationMode.CLAUSE_TRIM.value
    negation_config: Optional[str] = None
    bank: str = "default"
    cider_sigma_mode: str = CiderSigmaMode.REF_RELATIVE.value
    seed: int = 0
    strict: bool = False
    fmt: str = "csv"

    def metadata(self) -> dict:
        return {"tool": "reporteval", "version": __version__, "config": asdict(self)}


def _parse_variants(spec: str) -> list[Variant]:
    variants = []
    for token in spec.split(","):
        token = token.strip()
        if token not in _VARIANT_ALIASES:
            raise SystemExit(
                f"unknown variant {token!r}; expected report, paired, or negremoved"
            )
        variants.append(_VARIANT_ALIASES[token])
    return variants


def _load_bank(spec: str) -> forte_mod.KeywordBank:
    if spec == "default":
        return forte_mod.default_bank()
    return forte_mod.load_bank(spec)


def _negation_config(args) -> NegationConfig:
    if getattr(args, "negation_config", None):
        return NegationConfig.from_json(args.negation_config)
    return NegationConfig(mode=NegationMode(args.negation_mode))


def _echo(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _write_table(path: Optional[str], header: Sequence[str], rows: Sequence[Sequence], metadata: dict) -> None:
    out = open(path, "w", encoding="utf-8", newline="") if path else sys.stdout
    try:
        out.write(f"# meta: {json.dumps(metadata, sort_keys=True)}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            out.close()


def _fmt_cell(value) -> str:
    if value is None:
        return "N/A"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    config = RunConfig(
        command="eval",
        corpus=args.corpus,
        variants=tuple(args.variant.split(",")),
        embedder=args.embedder,
        negation_mode=args.negation_mode,
        negation_config=args.negation_config,
        bank=args.bank,
        cider_sigma_mode=args.cider_sigma_mode,
        seed=args.seed,
        strict=args.strict,
        fmt=args.format,
    )
    variants = _parse_variants(args.variant)
    loaded = load_corpus(args.corpus, strict=args.strict)
    for err in loaded.errors:
        logger.error("corpus record skipped: %s", err.message)
    cases = list(loaded.cases)
    if not cases:
        print("error: corpus contains no usable cases", file=sys.stderr)
        return 1
    bank = _load_bank(args.bank)
    negation = _negation_config(args)
    metric_config = MetricConfig(cider_sigma_mode=CiderSigmaMode(args.cider_sigma_mode))
    if args.pairing == "off":
        variants = [v for v in variants if v is Variant.REPORT_LEVEL] or [Variant.REPORT_LEVEL]

    results = []
    records = []
    skipped_total = 0
    for variant in variants:
        provider = None
        if args.embedder != "fallback" and variant is not Variant.REPORT_LEVEL:
            provider = build_provider(args.embedder)
        result = pipeline.score_corpus(
            cases, variant, provider=provider, config=metric_config, bank=bank, negation=negation
        )
        results.append(result)
        records.extend(result.records)
        skipped_total += len(result.skipped)
        for skip in result.skipped:
            logger.warning("case %s skipped under %s: %s", skip.case_id, variant.value, skip.reason)
    write_scores(records, args.out, fmt=args.format, metadata=config.metadata())
    _echo(args, f"wrote {len(records)} score records to {args.out}")

    summary = pipeline.summarize(cases, results)
    metric_cols = [c for m in args.metrics.split(",") for c in _METRIC_COLUMNS[m.strip()]]
    header = ["model_tag", "variant", "n_cases", *metric_cols, "forte_average"]
    rows = []
    for row in summary:
        rows.append(
            [row.model_tag, row.variant.value, row.n_cases]
            + [_fmt_cell(row.means[c]) for c in metric_cols]
            + [_fmt_cell(row.means["forte_average"])]
        )
    if args.summary_out:
        _write_table(args.summary_out, header, rows, config.metadata())
    if not args.quiet:
        widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
        print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for r in rows:
            print("  ".join(str(v).ljust(w) for v, w in zip(r, widths)))
    if skipped_total:
        _echo(args, f"skipped {skipped_total} case-variant combination(s)")
        if args.strict:
            return 2
    if loaded.errors and args.strict:
        return 2
    return 0


def cmd_forte(args) -> int:
    config = RunConfig(
        command="forte",
        corpus=args.corpus,
        variants=(args.variant,),
        bank=args.bank,
        negation_mode=args.negation_mode,
        negation_config=args.negation_config,
        strict=args.strict,
    )
    variants = _parse_variants(args.variant)
    loaded = load_corpus(args.corpus, strict=args.strict)
    if not loaded.cases:
        print("error: corpus contains no usable cases", file=sys.stderr)
        return 1
    bank = _load_bank(args.bank)
    negation = _negation_config(args)
    header = ["case_id", "variant"]
    for cat in forte_mod.FORTE_CATEGORIES:
        header += [f"{cat}_p", f"{cat}_r", f"{cat}_f1"]
    header.append("forte_average")
    rows = []
    for variant in variants:
        summary = forte_mod.forte_corpus(list(loaded.cases), bank, variant, negation)
        for case_score in summary.cases:
            row = [case_score.case_id, variant.value]
            for cat in forte_mod.FORTE_CATEGORIES:
                s = case_score.categories[cat]
                row += [_fmt_cell(s.precision), _fmt_cell(s.recall), _fmt_cell(s.f1)]
            row.append(_fmt_cell(case_score.average))
            rows.append(row)
        mean_row = ["__corpus_mean__", variant.value]
        for cat in forte_mod.FORTE_CATEGORIES:
            mean_row += ["", "", _fmt_cell(summary.category_means[cat])]
        mean_row.append(_fmt_cell(summary.average))
        rows.append(mean_row)
    _write_table(args.out, header, rows, config.metadata())
    _echo(args, f"wrote keyword F1 table to {args.out or 'stdout'}")
    return 0


def cmd_corr(args) -> int:
    config = RunConfig(command="corr")
    rows, _meta = read_scores(args.scores)
    if len(rows) < 3:
        print("error: need at least 3 scored cases for correlations", file=sys.stderr)
        return 1
    columns = {}
    for name in args.columns.split(","):
        name = name.strip()
        columns[name] = [row.get(name) for row in rows]
    matrix = stats.metric_correlation_matrix(columns)
    names = list(columns)
    out_rows = []
    for a in names:
        for b in names:
            cell = matrix.get((a, b))
            if cell is None:
                out_rows.append([a, b, "N/A", "N/A", 0, ""])
            else:
                out_rows.append(
                    [a, b, f"{cell.r:.4f}", f"{cell.p_value:.4g}", cell.n, stats.significance_stars(cell.p_value)]
                )
    _write_table(args.out, ["column_a", "column_b", "r", "p_value", "n", "stars"], out_rows, config.metadata())
    _echo(args, f"wrote correlation matrix to {args.out or 'stdout'}")
    return 0


def cmd_freq(args) -> int:
    config = RunConfig(command="freq", corpus=args.corpus, bank=args.bank)
    loaded = load_corpus(args.corpus, strict=False)
    if not loaded.cases:
        print("error: corpus contains no usable cases", file=sys.stderr)
        return 1
    bank = None if args.bank in ("all", "none") else _load_bank(args.bank)
    points = stats.keyword_frequency(list(loaded.cases), bank)
    metadata = config.metadata()
    if args.regression:
        try:
            fit = stats.recall_regression(points)
            metadata["regression"] = {
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "n": fit.n,
                "scale": "log10",
            }
            _echo(
                args,
                f"log-log recall fit: y={fit.slope:.2f}x{fit.intercept:+.2f}; r^2={fit.r_squared:.2f}",
            )
        except stats.StatsError as exc:
            _echo(args, f"regression unavailable: {exc}")
    rows = [[p.keyword, p.freq_reference, p.freq_candidate] for p in points]
    _write_table(args.out, ["keyword", "freq_reference", "freq_candidate"], rows, metadata)
    return 0


def cmd_utest(args) -> int:
    config = RunConfig(command="utest")
    rows_a, _ = read_scores(args.scores[0])
    rows_b, _ = read_scores(args.scores[1])
    numeric_a = {k for row in rows_a for k, v in row.items() if isinstance(v, float)}
    numeric_b = {k for row in rows_b for k, v in row.items() if isinstance(v, float)}
    if args.column == "all":
        columns = sorted(numeric_a & numeric_b)
        missing = numeric_a ^ numeric_b
        if missing:
            print(f"error: column mismatch between score files: {sorted(missing)}", file=sys.stderr)
            return 1
    else:
        columns = [args.column]
        if args.column not in numeric_a or args.column not in numeric_b:
            print(f"error: column {args.column!r} missing from one of the score files", file=sys.stderr)
            return 1
    out_rows = []
    for column in columns:
        a = [row[column] for row in rows_a if row.get(column) is not None]
        b = [row[column] for row in rows_b if row.get(column) is not None]
        try:
            result = stats.mann_whitney_u(a, b)
        except stats.StatsError as exc:
            out_rows.append([column, "N/A", "N/A", "", f"{exc}"])
            continue
        out_rows.append(
            [column, f"{result.u:.1f}", f"{result.p_value:.4g}", stats.significance_stars(result.p_value), result.method]
        )
    _write_table(args.out, ["column", "U", "p_two_tailed", "stars", "method"], out_rows, config.metadata())
    return 0


def cmd_labels(args) -> int:
    reports: dict[str, Report] = {}
    with open(args.reports, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            scan_id = str(record.get("scan_id") or record.get("case_id") or "")
            text = record.get("text") or record.get("candidate_text")
            if not scan_id or text is None:
                raise CorpusError(f"line {line_no}: reports file needs scan_id and text")
            reports[scan_id] = Report.from_text(scan_id, Source.MODEL, str(text))
    labels, errors = load_labels(args.labels, strict=False)
    for err in errors:
        logger.error("label record skipped: %s", err.message)
    concepts = list(Concept) if args.concept == "all" else [Concept(args.concept)]
    negation = _negation_config(args)
    rows = []
    for concept in concepts:
        result = concept_accuracy(
            reports,
            labels,
            DEFAULT_LEXICONS[concept],
            negation_aware=args.negation_aware,
            negation=negation,
        )
        rows.append(
            [
                concept.value,
                f"{result.accuracy:.4f}",
                result.tp,
                result.tn,
                result.fp,
                result.fn,
                len(result.skipped),
            ]
        )
    config = RunConfig(command="labels", negation_mode=args.negation_mode)
    _write_table(
        args.out, ["concept", "accuracy", "tp", "tn", "fp", "fn", "skipped"], rows, config.metadata()
    )
    return 0


def cmd_survey(args) -> int:
    from .survey import SurveyDefinition, SurveyService, analyze_log, load_events

    if args.survey_command == "serve":
        import uvicorn

        from .survey import create_app

        definition = SurveyDefinition.from_json(args.config)
        service = SurveyService(definition, args.log, shuffle_seed=args.seed if args.shuffle else None)
        app = create_app(service, assets_dir=args.assets)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return 0
    if args.survey_command == "report":
        report = analyze_log(load_events(args.log)).as_dict()
        text = json.dumps(report, indent=2, sort_keys=True)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return 0
    raise SystemExit(f"unknown survey command {args.survey_command!r}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for any shuffling")
    parser.add_argument("--strict", action="store_true", help="fail on record errors and skips")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--quiet", action="store_true")


def _add_negation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--negation-mode",
        choices=tuple(m.value for m in NegationMode),
        default=NegationMode.CLAUSE_TRIM.value,
    )
    parser.add_argument("--negation-config", help="JSON file with cue_tokens/mode overrides")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reporteval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"reporteval {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="score a corpus with the traditional metrics")
    p_eval.add_argument("--corpus", required=True)
    p_eval.add_argument("--variant", default="report,paired,negremoved")
    p_eval.add_argument("--metrics", default="bleu,meteor,rouge,cider")
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--summary-out")
    p_eval.add_argument("--pairing", choices=("on", "off"), default="on")
    p_eval.add_argument("--embedder", default="fallback", help="fallback or external:<url-or-cmd>")
    p_eval.add_argument("--bank", default="default")
    p_eval.add_argument(
        "--cider-sigma-mode",
        choices=tuple(m.value for m in CiderSigmaMode),
        default=CiderSigmaMode.REF_RELATIVE.value,
    )
    _add_negation(p_eval)
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_forte = sub.add_parser("forte", help="keyword-category F1 per case and corpus")
    p_forte.add_argument("--corpus", required=True)
    p_forte.add_argument("--bank", default="default")
    p_forte.add_argument("--variant", default="report")
    p_forte.add_argument("--out")
    _add_negation(p_forte)
    _add_common(p_forte)
    p_forte.set_defaults(func=cmd_forte)

    p_corr = sub.add_parser("corr", help="pairwise Pearson matrix over score columns")
    p_corr.add_argument("--scores", required=True)
    p_corr.add_argument(
        "--columns",
        default="bleu1,bleu2,bleu3,bleu4,meteor,rouge_l,cider_r,"
        "forte_degree_f1,forte_landmark_f1,forte_feature_f1,forte_impression_f1",
    )
    p_corr.add_argument("--out")
    _add_common(p_corr)
    p_corr.set_defaults(func=cmd_corr)

    p_freq = sub.add_parser("freq", help="keyword frequency in references vs candidates")
    p_freq.add_argument("--corpus", required=True)
    p_freq.add_argument("--bank", default="default", help="default, a bank path, or all/none for raw tokens")
    p_freq.add_argument("--regression", action="store_true", help="fit log-log recall regression")
    p_freq.add_argument("--out")
    _add_common(p_freq)
    p_freq.set_defaults(func=cmd_freq)

    p_utest = sub.add_parser("utest", help="two-tailed Mann-Whitney U between two score files")
    p_utest.add_argument("--scores", nargs=2, required=True, metavar=("A", "B"))
    p_utest.add_argument("--column", default="all")
    p_utest.add_argument("--out")
    _add_common(p_utest)
    p_utest.set_defaults(func=cmd_utest)

    p_labels = sub.add_parser("labels", help="mention accuracy against majority-rule labels")
    p_labels.add_argument("--reports", required=True, help="JSONL of {scan_id, text}")
    p_labels.add_argument("--labels", required=True, help="rater-vote CSV")
    p_labels.add_argument("--concept", default="all", choices=("all", *(c.value for c in Concept)))
    p_labels.add_argument("--negation-aware", action=argparse.BooleanOptionalAction, default=True)
    p_labels.add_argument("--out")
    _add_negation(p_labels)
    _add_common(p_labels)
    p_labels.set_defaults(func=cmd_labels)

    p_survey = sub.add_parser("survey", help="blinded authorship survey service")
    survey_sub = p_survey.add_subparsers(dest="survey_command", required=True)
    p_serve = survey_sub.add_parser("serve")
    p_serve.add_argument("--config", required=True, help="survey definition JSON")
    p_serve.add_argument("--log", required=True, help="append-only event log (JSONL)")
    p_serve.add_argument("--port", type=int, default=8400)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--assets", help="directory served under /assets")
    p_serve.add_argument("--shuffle", action="store_true", help="shuffle case order per session")
    _add_common(p_serve)
    p_serve.set_defaults(func=cmd_survey)
    p_report = survey_sub.add_parser("report")
    p_report.add_argument("--log", required=True)
    p_report.add_argument("--out")
    _add_common(p_report)
    p_report.set_defaults(func=cmd_survey)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, forte_mod.BankError, stats.StatsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
