"""
Objective evaluation of generated and performed scores.

- similarity: attribute vectors, cosine and absolute similarity, corpus reports
- expression: velocity/microtiming histograms and their divergence
- report: tables and JSON-line records
"""

from .expression import (
    Divergence,
    ExpressionHistogram,
    expression_histograms,
    histogram_divergence,
    microtiming_bin,
    pooled_histograms,
)
from .report import FidelityRow, format_fidelity_table, format_similarity_table, log_fidelity, log_similarity
from .similarity import (
    AttributeKind,
    AttributeVector,
    SimilarityReport,
    absolute_similarity,
    attribute_vector,
    corpus_similarity,
    cosine_similarity,
    pair_similarity,
)

__all__ = [
    "AttributeKind",
    "AttributeVector",
    "Divergence",
    "ExpressionHistogram",
    "FidelityRow",
    "SimilarityReport",
    "absolute_similarity",
    "attribute_vector",
    "corpus_similarity",
    "cosine_similarity",
    "expression_histograms",
    "format_fidelity_table",
    "format_similarity_table",
    "histogram_divergence",
    "log_fidelity",
    "log_similarity",
    "microtiming_bin",
    "pair_similarity",
    "pooled_histograms",
]
