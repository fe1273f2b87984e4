"""
Attribute similarity between generated and source scores.

Pitch, onset and duration are each summarized as a count vector; two
vectors are compared by scaled cosine similarity (0-100). Absolute
similarity counts notes that match exactly on all three attributes.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..core.errors import ConfigurationError, SimilarityUndefinedError
from ..core.note_event import NoteEvent, Score

logger = logging.getLogger(__name__)

SLOTS = 64  # 4 bars of 16ths


class AttributeKind(Enum):
    """Summarized note attribute."""
    PITCH = "pitch"
    ONSET = "onset"
    DURATION = "duration"

    @property
    def size(self) -> int:
        return 128 if self is AttributeKind.PITCH else SLOTS


SIMILARITY_COLUMNS = ("pitch", "onset", "duration", "absolute")


def sixteenth_index(ticks: int, ticks_per_quarter: int) -> int:
    """Nearest 16th-note index of a tick position, halves rounded up."""
    return (8 * ticks + ticks_per_quarter) // (2 * ticks_per_quarter)


def onset_slot(note: NoteEvent, ticks_per_quarter: int) -> int:
    return sixteenth_index(note.onset_ticks, ticks_per_quarter) % SLOTS


def duration_slot(note: NoteEvent, ticks_per_quarter: int) -> int:
    return min(sixteenth_index(note.duration_ticks, ticks_per_quarter), SLOTS - 1)


@dataclass(frozen=True)
class AttributeVector:
    """
    Count vector of one attribute.

    Attributes:
        kind: Attribute summarized
        values: int64 counts, 128 entries for pitch, 64 otherwise
    """

    kind: AttributeKind
    values: np.ndarray

    def __add__(self, other: "AttributeVector") -> "AttributeVector":
        _check_compatible(self, other)
        return AttributeVector(self.kind, self.values + other.values)

    def scaled(self, factor: int) -> "AttributeVector":
        return AttributeVector(self.kind, self.values * factor)

    @classmethod
    def zeros(cls, kind: AttributeKind) -> "AttributeVector":
        return cls(kind, np.zeros(kind.size, dtype=np.int64))


def attribute_vector(score: Score, kind: AttributeKind) -> AttributeVector:
    """
    Histogram one attribute of a score.

    Onsets snap to the nearest 16th and wrap modulo 64; durations snap to
    the nearest 16th multiple and clamp to the last bin.
    """
    values = np.zeros(kind.size, dtype=np.int64)
    tpq = score.ticks_per_quarter
    for note in score.notes:
        if kind is AttributeKind.PITCH:
            index = note.pitch
        elif kind is AttributeKind.ONSET:
            index = onset_slot(note, tpq)
        else:
            index = duration_slot(note, tpq)
        values[index] += 1
    return AttributeVector(kind, values)


def _check_compatible(a: AttributeVector, b: AttributeVector) -> None:
    if a.kind != b.kind or a.values.shape != b.values.shape:
        raise ConfigurationError(f"cannot compare {a.kind.value} and {b.kind.value} vectors")


def cosine_similarity(a: AttributeVector, b: AttributeVector) -> float:
    """
    100 * <a, b> / (|a| |b|).

    Integer dot products keep self-similarity at exactly 100.

    Raises:
        SimilarityUndefinedError: If either vector is all zeros
    """
    _check_compatible(a, b)
    left = [int(v) for v in a.values]
    right = [int(v) for v in b.values]
    norm_a = sum(v * v for v in left)
    norm_b = sum(v * v for v in right)
    if norm_a == 0 or norm_b == 0:
        raise SimilarityUndefinedError(f"{a.kind.value} similarity is undefined for an all-zero vector")
    dot = sum(x * y for x, y in zip(left, right))
    return 100.0 * dot / math.sqrt(norm_a * norm_b)


def _note_keys(score: Score) -> Counter:
    tpq = score.ticks_per_quarter
    return Counter((n.pitch, onset_slot(n, tpq), duration_slot(n, tpq)) for n in score.notes)


def absolute_matches(generated: Score, source: Score) -> int:
    """Generated notes matched one-to-one to source notes on (pitch, onset slot, duration slot)."""
    return sum((_note_keys(generated) & _note_keys(source)).values())


def absolute_similarity(generated: Score, source: Score) -> float:
    """
    Percentage of generated notes with an exact match in the source.

    Raises:
        SimilarityUndefinedError: If the generated score has no notes
    """
    if not generated.notes:
        raise SimilarityUndefinedError("absolute similarity is undefined for an empty score")
    return 100.0 * absolute_matches(generated, source) / len(generated.notes)


@dataclass
class SimilarityReport:
    """
    Corpus similarity, averaged per file and pooled over counts.

    Attributes:
        per_file: Column -> mean over files where the value is defined
        pooled: Column -> similarity of summed counts
        files: Number of (generated, source) pairs
        skipped: Column -> pairs without a defined value
    """

    per_file: Dict[str, float]
    pooled: Dict[str, float]
    files: int
    skipped: Dict[str, int]

    def to_dict(self) -> Dict[str, object]:
        return {"per_file": dict(self.per_file), "pooled": dict(self.pooled),
                "files": self.files, "skipped": dict(self.skipped)}


def pair_similarity(generated: Score, source: Score) -> Dict[str, float]:
    """All defined similarity columns of one pair."""
    values = {}
    for kind in AttributeKind:
        try:
            values[kind.value] = cosine_similarity(attribute_vector(generated, kind),
                                                   attribute_vector(source, kind))
        except SimilarityUndefinedError:
            pass
    if generated.notes:
        values["absolute"] = absolute_similarity(generated, source)
    return values


def corpus_similarity(generated: Sequence[Score], sources: Sequence[Score]) -> SimilarityReport:
    """
    Compare generated scores with their sources pairwise.

    Args:
        generated: Generated scores
        sources: Sources, index-aligned with `generated`

    Returns:
        SimilarityReport

    Raises:
        ConfigurationError: If the two lists differ in length
        SimilarityUndefinedError: If no pair has any defined value
    """
    if len(generated) != len(sources):
        raise ConfigurationError(f"{len(generated)} generated scores for {len(sources)} sources")
    collected: Dict[str, List[float]] = {column: [] for column in SIMILARITY_COLUMNS}
    totals: Dict[AttributeKind, Tuple[AttributeVector, AttributeVector]] = {
        kind: (AttributeVector.zeros(kind), AttributeVector.zeros(kind)) for kind in AttributeKind}
    matches = 0
    generated_notes = 0
    for gen, src in zip(generated, sources):
        for column, value in pair_similarity(gen, src).items():
            collected[column].append(value)
        for kind in AttributeKind:
            gen_total, src_total = totals[kind]
            totals[kind] = (gen_total + attribute_vector(gen, kind), src_total + attribute_vector(src, kind))
        matches += absolute_matches(gen, src)
        generated_notes += len(gen.notes)

    per_file = {column: float(np.mean(values)) for column, values in collected.items() if values}
    if not per_file:
        raise SimilarityUndefinedError("no pair has a defined similarity")
    pooled = {}
    for kind, (gen_total, src_total) in totals.items():
        try:
            pooled[kind.value] = cosine_similarity(gen_total, src_total)
        except SimilarityUndefinedError:
            logger.warning("Pooled %s similarity undefined", kind.value)
    if generated_notes:
        pooled["absolute"] = 100.0 * matches / generated_notes
    skipped = {column: len(generated) - len(values) for column, values in collected.items()}
    return SimilarityReport(per_file, pooled, len(generated), skipped)
