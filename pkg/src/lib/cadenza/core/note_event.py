"""
NoteEvent and Score - Internal note representation.

A NoteEvent is a single sounding note with tick-accurate timing. A Score is
an ordered collection of NoteEvents sharing one ticks-per-quarter
resolution; it is the unit exchanged between the MIDI codec, the tokenizer,
the corpus tools and the metrics.
"""

from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Tuple

from .errors import ConfigurationError


@dataclass(frozen=True)
class NoteEvent:
    """
    A sounding note.

    Attributes:
        pitch: MIDI pitch 0-127
        onset_ticks: Absolute onset in ticks
        duration_ticks: Length in ticks, at least 1
        velocity: MIDI velocity 1-127
    """

    pitch: int
    onset_ticks: int
    duration_ticks: int
    velocity: int

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"Invalid pitch: {self.pitch}. Must be 0-127")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"Invalid velocity: {self.velocity}. Must be 1-127")
        if self.duration_ticks < 1:
            raise ValueError(f"Invalid duration: {self.duration_ticks}. Must be >= 1")
        if self.onset_ticks < 0:
            raise ValueError(f"Invalid onset: {self.onset_ticks}. Must be >= 0")

    @property
    def end_ticks(self) -> int:
        """Tick at which the note is released."""
        return self.onset_ticks + self.duration_ticks

    def sort_key(self) -> Tuple[int, int, int, int]:
        """Canonical (onset, pitch) ordering key."""
        return (self.onset_ticks, self.pitch, self.duration_ticks, self.velocity)

    def __str__(self) -> str:
        return (f"NoteEvent(pitch={self.pitch}, onset={self.onset_ticks}, "
                f"dur={self.duration_ticks}, vel={self.velocity})")


@dataclass(frozen=True)
class Score:
    """
    Single-track note content at a fixed resolution.

    Attributes:
        ticks_per_quarter: Time resolution (TPQ)
        notes: NoteEvents sorted by (onset, pitch)
        length_ticks: Total length; every note ends at or before it
        time_signature: (numerator, denominator), 4/4 unless the file says otherwise
    """

    ticks_per_quarter: int
    notes: Tuple[NoteEvent, ...] = ()
    length_ticks: int = 0
    time_signature: Tuple[int, int] = field(default=(4, 4))

    def __post_init__(self):
        if self.ticks_per_quarter <= 0:
            raise ConfigurationError(f"ticks_per_quarter must be positive, got {self.ticks_per_quarter}")
        numerator, denominator = self.time_signature
        if numerator <= 0 or denominator <= 0 or denominator & (denominator - 1):
            raise ConfigurationError(f"Invalid time signature: {numerator}/{denominator}")
        object.__setattr__(self, "notes", tuple(self.notes))

    @classmethod
    def from_notes(cls, ticks_per_quarter: int, notes: Iterable[NoteEvent],
                   length_ticks: Optional[int] = None,
                   time_signature: Tuple[int, int] = (4, 4)) -> "Score":
        """
        Build a Score, sorting notes and deriving the length if not given.

        Args:
            ticks_per_quarter: Time resolution
            notes: Notes in any order
            length_ticks: Explicit length; defaults to the latest note end
            time_signature: Bar structure

        Returns:
            Sorted Score
        """
        ordered = sorted(notes, key=NoteEvent.sort_key)
        end = max((n.end_ticks for n in ordered), default=0)
        if length_ticks is None:
            length_ticks = end
        return cls(ticks_per_quarter, tuple(ordered), max(length_ticks, end), time_signature)

    @property
    def bar_ticks(self) -> int:
        """Ticks per bar implied by the time signature."""
        numerator, denominator = self.time_signature
        return numerator * 4 * self.ticks_per_quarter // denominator

    @property
    def sixteenth_ticks(self) -> float:
        """Ticks per 16th note."""
        return self.ticks_per_quarter / 4

    def __len__(self) -> int:
        return len(self.notes)

    def with_notes(self, notes: Iterable[NoteEvent]) -> "Score":
        """Copy of this Score with other notes, same resolution and length."""
        return Score.from_notes(self.ticks_per_quarter, notes, self.length_ticks, self.time_signature)

    def pitches(self) -> List[int]:
        return [n.pitch for n in self.notes]

    def validation_errors(self) -> List[str]:
        """
        List the Score invariants this instance breaks.

        Returns:
            Human-readable problems; empty when the Score is valid
        """
        problems = []
        keys = [n.sort_key()[:2] for n in self.notes]
        if keys != sorted(keys):
            problems.append("notes are not sorted by (onset, pitch)")
        open_until = {}
        for index, note in enumerate(self.notes):
            if note.end_ticks > self.length_ticks:
                problems.append(f"note #{index} ends after length_ticks")
            if open_until.get(note.pitch, 0) > note.onset_ticks:
                problems.append(f"note #{index} overlaps an earlier note of pitch {note.pitch}")
            open_until[note.pitch] = max(open_until.get(note.pitch, 0), note.end_ticks)
        return problems

    def is_valid(self) -> bool:
        return not self.validation_errors()

    def transposed(self, semitones: int) -> "Score":
        """Copy with every pitch shifted; used by fixtures and augmentation."""
        return self.with_notes(replace(n, pitch=n.pitch + semitones) for n in self.notes)
