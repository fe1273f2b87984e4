"""
Multi-grid quantization and value snapping.
"""

from typing import List, Sequence, Tuple

from .config import TokenizerConfig


def quantize_onset(onset_ticks: int, config: TokenizerConfig) -> Tuple[int, int]:
    """
    Snap an onset to the closest point of any configured grid.

    Ties go to the finer grid, then to the earlier tick.

    Args:
        onset_ticks: Absolute onset in ticks
        config: Tokenizer configuration

    Returns:
        (grid_tick, residual_ticks) with residual = onset - grid_tick
    """
    candidates = []
    for step in config.grids:
        below = (onset_ticks // step) * step
        candidates.extend((abs(onset_ticks - c), step, c) for c in (below, below + step))
    _, _, grid_tick = min(candidates)
    return grid_tick, onset_ticks - grid_tick


def nearest_microshift(residual: int, values: Sequence[int]) -> int:
    """Microshift bucket value closest to a residual (ties toward zero); clamps."""
    return min(values, key=lambda v: (abs(residual - v), abs(v)))


def nearest_duration(duration: int, values: Sequence[int]) -> int:
    """Duration value closest to a length in ticks (ties toward the shorter)."""
    return min(values, key=lambda v: (abs(duration - v), v))


def decompose_timeshift(delta: int, values: Sequence[int]) -> List[int]:
    """
    Greedy largest-first split of a delta into TimeShift values.

    Args:
        delta: Non-negative gap between quantized onsets
        values: Ascending TimeShift values

    Returns:
        Values summing to delta; empty for a zero delta

    Raises:
        ValueError: If the delta is not expressible with the values
    """
    parts = []
    remaining = delta
    index = len(values) - 1
    while remaining > 0:
        while index >= 0 and values[index] > remaining:
            index -= 1
        if index < 0:
            raise ValueError(f"TimeShift delta {delta} leaves remainder {remaining}")
        parts.append(values[index])
        remaining -= values[index]
    return parts
