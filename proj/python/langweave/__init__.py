"""Multilingual dataset curation toolkit.

Thin python surface over the C++ core: text metrics (BLEU, readability),
manifest handling, stratified sampling, prompt rendering, and the toxicity
set algebra. Batch orchestration against remote backends lives in the
`langweave` CLI.
"""

from langweave._core import (
    BackendError,
    BleuBreakdown,
    ConfigError,
    ConversationTurn,
    DatasetManifest,
    ImageTextRecord,
    LengthStats,
    PreambleTemplate,
    StratumAssignment,
    TranslationUnit,
    ValidationError,
    avg_ngram_bleu,
    bleu,
    content_hash,
    count_placeholders,
    default_preamble,
    extract_targets,
    filter_dataset,
    fkgl,
    flesch_reading_ease,
    language_display_name,
    length_analysis,
    load_manifest,
    load_preamble,
    merge_flags,
    modified_precision,
    render_prompt,
    sample_representative,
    save_manifest,
    sha256_hex,
    stratify,
    tokenize,
    translate_text,
)

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "BleuBreakdown",
    "ConfigError",
    "ConversationTurn",
    "DatasetManifest",
    "ImageTextRecord",
    "LengthStats",
    "PreambleTemplate",
    "StratumAssignment",
    "TranslationUnit",
    "ValidationError",
    "avg_ngram_bleu",
    "bleu",
    "content_hash",
    "count_placeholders",
    "default_preamble",
    "extract_targets",
    "filter_dataset",
    "fkgl",
    "flesch_reading_ease",
    "language_display_name",
    "length_analysis",
    "load_manifest",
    "load_preamble",
    "merge_flags",
    "modified_precision",
    "render_prompt",
    "sample_representative",
    "save_manifest",
    "sha256_hex",
    "stratify",
    "tokenize",
    "translate_text",
]
