"""
Synthetic style corpora.

A StyleSpec describes the expressive habits of a player: how hard they
play (velocity mean/std) and how early or late (microshift mean/std in
ticks). Melodies are drawn on a 16th grid; timing and dynamics are then
perturbed according to the style.
"""

import logging
from typing import List, Tuple

import numpy as np
from pydantic import Field, model_validator
from scipy.stats import norm

from ..core.config_model import ConfigModel
from ..core.note_event import NoteEvent, Score
from ..numerics.rng import stream

logger = logging.getLogger(__name__)

MIN_VELOCITY_COVERAGE = 0.99


class StyleSpec(ConfigModel):
    """Expressive style of a synthetic corpus."""

    name: str = "style"
    velocity_mean: float = Field(default=80.0, ge=1, le=127)
    velocity_std: float = Field(default=0.0, ge=0)
    microshift_mean: float = 0.0
    microshift_std: float = Field(default=0.0, ge=0)
    notes_per_bar: int = Field(default=8, ge=1, le=16)
    pitches: Tuple[int, ...] = (60, 62, 64, 65, 67, 69, 71, 72)
    duration_sixteenths: Tuple[int, ...] = (1, 2)
    bars: int = Field(default=4, ge=1)
    max_microshift_ticks: int = Field(default=30, ge=0)
    ticks_per_quarter: int = Field(default=480, gt=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_bounds(self) -> "StyleSpec":
        if not self.pitches or not all(0 <= p <= 127 for p in self.pitches):
            raise ValueError("pitches must be a non-empty set of MIDI pitches")
        if not self.duration_sixteenths or min(self.duration_sixteenths) < 1:
            raise ValueError("duration_sixteenths must be positive")
        if self.ticks_per_quarter % 4:
            raise ValueError("ticks_per_quarter must be divisible by 4")
        if self.velocity_std > 0:
            inside = norm.cdf(127.5, self.velocity_mean, self.velocity_std) - norm.cdf(
                0.5, self.velocity_mean, self.velocity_std)
            if inside < MIN_VELOCITY_COVERAGE:
                raise ValueError(f"only {inside:.3f} of velocity draws fall inside 1-127")
        if abs(self.microshift_mean) + 2 * self.microshift_std > self.max_microshift_ticks:
            raise ValueError("|microshift_mean| + 2 * microshift_std exceeds max_microshift_ticks")
        return self

    @property
    def sixteenth_ticks(self) -> int:
        return self.ticks_per_quarter // 4

    @property
    def length_ticks(self) -> int:
        return self.bars * 4 * self.ticks_per_quarter


STYLE_A = StyleSpec(name="A", velocity_mean=100, velocity_std=5, microshift_mean=8, microshift_std=3, seed=1)
STYLE_B = StyleSpec(name="B", velocity_mean=60, velocity_std=15, microshift_mean=-8, microshift_std=3, seed=2)
NEUTRAL = StyleSpec(name="neutral", velocity_mean=80, seed=3)


def synth_score(spec: StyleSpec, index: int) -> Score:
    """
    The index-th score of a style corpus.

    Each bar gets `notes_per_bar` distinct 16th slots. Velocities and
    microshifts are rounded normal draws, clamped to 1-127 and to
    +-max_microshift_ticks; onsets are clamped at 0. Durations are cut so
    that same-pitch notes never overlap and every note ends in the window.
    """
    rng = stream(spec.seed, "synth", index)
    step = spec.sixteenth_ticks
    drafts = []
    for bar in range(spec.bars):
        slots = np.sort(rng.choice(16, size=spec.notes_per_bar, replace=False))
        for slot in slots:
            pitch = int(rng.choice(spec.pitches))
            duration = int(rng.choice(spec.duration_sixteenths)) * step
            velocity = int(np.clip(np.rint(rng.normal(spec.velocity_mean, spec.velocity_std)), 1, 127))
            shift = int(np.clip(np.rint(rng.normal(spec.microshift_mean, spec.microshift_std)),
                                -spec.max_microshift_ticks, spec.max_microshift_ticks))
            onset = max((bar * 16 + int(slot)) * step + shift, 0)
            drafts.append((onset, pitch, duration, velocity))

    drafts.sort()
    next_onset = {}
    notes = []
    for onset, pitch, duration, velocity in reversed(drafts):
        end = min(onset + duration, next_onset.get(pitch, spec.length_ticks), spec.length_ticks)
        notes.append(NoteEvent(pitch, onset, end - onset, velocity))
        next_onset[pitch] = onset
    return Score.from_notes(spec.ticks_per_quarter, notes, spec.length_ticks)


def synth_corpus(spec: StyleSpec, n: int) -> List[Score]:
    """n seeded scores of a style; the same spec always yields the same corpus."""
    logger.debug("Synthesizing %d scores of style %s", n, spec.name)
    return [synth_score(spec, index) for index in range(n)]
