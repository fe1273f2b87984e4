"""
Segmentation of scores into disjoint windows of whole bars.
"""

from typing import List

from ..core.errors import ConfigurationError
from ..core.note_event import NoteEvent, Score


def segment(score: Score, bars: int = 4) -> List[Score]:
    """
    Cut a score into non-overlapping windows of `bars` bars.

    Notes are re-based to window-local onsets and truncated at the window
    end. A final partial window is kept only if it spans at least one bar;
    windows without notes are dropped.

    Args:
        score: Input score
        bars: Bars per window

    Returns:
        Window scores, in time order
    """
    if bars < 1:
        raise ConfigurationError(f"bars must be positive, got {bars}")
    window = bars * score.bar_ticks
    segments = []
    start = 0
    while start < score.length_ticks:
        stop = min(start + window, score.length_ticks)
        if stop - start < window and stop - start < score.bar_ticks:
            break
        notes = [NoteEvent(n.pitch, n.onset_ticks - start, min(n.end_ticks, stop) - n.onset_ticks, n.velocity)
                 for n in score.notes if start <= n.onset_ticks < stop]
        if notes:
            segments.append(Score.from_notes(score.ticks_per_quarter, notes, stop - start, score.time_signature))
        start += window
    return segments
