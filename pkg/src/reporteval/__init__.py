"""Evaluation toolkit for machine-generated radiology reports."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Concept,
    EvalCase,
    LabelRecord,
    Report,
    ScoreRecord,
    SentenceItem,
    Source,
    Variant,
    load_corpus,
    load_labels,
    read_scores,
    remove_negations,
    write_scores,
)
from .forte import KeywordBank, default_bank, extract, forte_corpus, forte_f1, load_bank  # noqa: F401
from .metrics import IdfTable, MetricConfig, bleu, cider_r, meteor, rouge_l  # noqa: F401
from .pairing import FallbackEmbedder, pair_sentences, paired_variant  # noqa: F401
from .pipeline import score_case, score_corpus, summarize  # noqa: F401
from .stats import keyword_frequency, mann_whitney_u, pearson, recall_regression, spearman  # noqa: F401
from .textproc import NegationConfig, NegationMode, itemize_texts, ngrams, tokenize  # noqa: F401
