from ._core import (
    Error,
    bleu_4,
    cosine,
    document_edits,
    hash_embed,
    lcs_length,
    normalize_document,
    rouge_l,
    run_benchmark,
    section_region,
    table_region,
    tokenize,
    validate_document,
)

__all__ = [
    "Error",
    "bleu_4",
    "cosine",
    "document_edits",
    "hash_embed",
    "lcs_length",
    "normalize_document",
    "rouge_l",
    "run_benchmark",
    "section_region",
    "table_region",
    "tokenize",
    "validate_document",
]
