"""
Expression histograms and their divergence statistics.

Velocity is counted at its raw MIDI value (128 bins). Microtiming is the
deviation of an onset from its nearest 16th note as a percentage of a
16th, in 100 one-percent bins over [-50%, +50%).
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import entropy

from ..core.errors import SimilarityUndefinedError
from ..core.note_event import Score
from .similarity import sixteenth_index

VELOCITY_BINS = 128
MICROTIMING_BINS = 100
SMOOTHING = 1e-6


def microtiming_bin(onset_ticks: int, ticks_per_quarter: int) -> int:
    """
    Percent-deviation bin of an onset.

    With 16th index k (halves rounded up) the deviation is
    onset - k * tpq / 4; bin = floor(100 * deviation / (tpq / 4)) + 50,
    computed on integers.
    """
    k = sixteenth_index(onset_ticks, ticks_per_quarter)
    deviation4 = 4 * onset_ticks - k * ticks_per_quarter
    return (100 * deviation4) // ticks_per_quarter + MICROTIMING_BINS // 2


@dataclass
class ExpressionHistogram:
    """
    Velocity and microtiming counts of a set of notes.

    Attributes:
        velocity: int64[128]
        microtiming: int64[100]
    """

    velocity: np.ndarray
    microtiming: np.ndarray

    @classmethod
    def empty(cls) -> "ExpressionHistogram":
        return cls(np.zeros(VELOCITY_BINS, dtype=np.int64), np.zeros(MICROTIMING_BINS, dtype=np.int64))

    @property
    def notes(self) -> int:
        return int(self.velocity.sum())

    def __add__(self, other: "ExpressionHistogram") -> "ExpressionHistogram":
        return ExpressionHistogram(self.velocity + other.velocity, self.microtiming + other.microtiming)


def expression_histograms(score: Score) -> ExpressionHistogram:
    """Velocity and microtiming counts of every note in a score."""
    histogram = ExpressionHistogram.empty()
    for note in score.notes:
        histogram.velocity[note.velocity] += 1
        histogram.microtiming[microtiming_bin(note.onset_ticks, score.ticks_per_quarter)] += 1
    return histogram


def pooled_histograms(scores: Iterable[Score]) -> ExpressionHistogram:
    total = ExpressionHistogram.empty()
    for score in scores:
        total = total + expression_histograms(score)
    return total


@dataclass(frozen=True)
class Divergence:
    """KL divergence and absolute differences of mean and std (in bins)."""
    kl: float
    mean_delta: float
    std_delta: float

    def to_dict(self):
        return {"kl": self.kl, "mean_delta": self.mean_delta, "std_delta": self.std_delta}


def smoothed_distribution(counts: Sequence[float]) -> np.ndarray:
    """
    Normalize counts, add SMOOTHING to every bin and renormalize.

    Raises:
        SimilarityUndefinedError: If the counts sum to zero
    """
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise SimilarityUndefinedError("histogram has no mass")
    p = counts / total + SMOOTHING
    return p / p.sum()


def _moments(p: np.ndarray):
    bins = np.arange(len(p), dtype=np.float64)
    mean = float(np.dot(bins, p))
    return mean, math.sqrt(float(np.dot((bins - mean) ** 2, p)))


def histogram_divergence(p_counts: Sequence[float], q_counts: Sequence[float]) -> Divergence:
    """
    KL(p || q) with smoothing, plus mean and std differences.

    Args:
        p_counts: Counts of the compared distribution (model predictions)
        q_counts: Counts of the reference distribution (dataset)

    Returns:
        Divergence

    Raises:
        SimilarityUndefinedError: If either histogram is empty or the lengths differ
    """
    if len(p_counts) != len(q_counts):
        raise SimilarityUndefinedError(f"histograms of {len(p_counts)} and {len(q_counts)} bins")
    p = smoothed_distribution(p_counts)
    q = smoothed_distribution(q_counts)
    p_mean, p_std = _moments(p)
    q_mean, q_std = _moments(q)
    return Divergence(float(entropy(p, q)), abs(p_mean - q_mean), abs(p_std - q_std))
