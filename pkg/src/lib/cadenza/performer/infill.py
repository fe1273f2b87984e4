"""
Performance infilling: mask the performance slots of a score sequence and
fill them from the performer.

Pitch, TimeShift and Duration tokens pass through untouched; each slot
receives a token of the kind it stands for.
"""

import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import torch

from ..core.errors import CheckpointError
from ..core.note_event import Score
from ..core.token import MASK, Token, TokenKind
from ..numerics.rng import torch_generator
from ..tokenizer.pertok import PerTok
from .model import Performer

logger = logging.getLogger(__name__)

Slots = List[Tuple[int, TokenKind]]
Windows = Dict[int, Tuple[int, int]]  # slot position -> inclusive value range


class FillMode(Enum):
    """Slot filling."""
    GREEDY = "greedy"
    SAMPLE = "sample"


def performance_kinds(tokenizer: PerTok) -> List[TokenKind]:
    """Enabled performance kinds in their per-note order."""
    kinds = []
    if tokenizer.config.use_velocity:
        kinds.append(TokenKind.VELOCITY)
    if tokenizer.config.use_microshift:
        kinds.append(TokenKind.MICRO_SHIFT)
    return kinds


def insert_performance_slots(tokens: Sequence[Token], tokenizer: PerTok) -> Tuple[List[Token], Slots]:
    """
    Put one MASK after each Pitch for every enabled performance kind.

    Existing performance tokens are replaced in place, so a sequence that
    already carries every slot keeps its length.

    Returns:
        (masked sequence, [(position, kind the slot stands for), ...])
    """
    kinds = performance_kinds(tokenizer)
    masked: List[Token] = []
    slots: Slots = []
    for token in tokens:
        if token.kind.is_performance:
            continue
        masked.append(token)
        if token.kind == TokenKind.PITCH:
            for kind in kinds:
                slots.append((len(masked), kind))
                masked.append(MASK)
    return masked, slots


def check_vocabulary(model: Performer, tokenizer: PerTok) -> None:
    """
    Raises:
        CheckpointError: If the model was trained on another vocabulary size
    """
    if model.config.vocab_size != len(tokenizer.vocabulary):
        raise CheckpointError(
            f"performer has {model.config.vocab_size} output ids, tokenizer vocabulary has {len(tokenizer.vocabulary)}")


def _allowed_choices(values: Sequence[int], window: Tuple[int, int]) -> torch.Tensor:
    """Mask over a kind's values inside an inclusive window, or the value nearest its centre."""
    low, high = window
    allowed = torch.tensor([low <= v <= high for v in values])
    if not bool(allowed.any()):
        centre = (low + high) / 2
        allowed[min(range(len(values)), key=lambda i: abs(values[i] - centre))] = True
    return allowed


def fill_slots(model: Performer, tokenizer: PerTok, masked: Sequence[Token], slots: Slots,
               mode: FillMode = FillMode.GREEDY, temperature: float = 1.0, seed: int = 0,
               windows: Optional[Windows] = None) -> List[Token]:
    """
    Replace each slot with the best (or a sampled) token of its kind.

    Args:
        model: Performer
        tokenizer: Tokenizer matching the model's vocabulary
        masked: Sequence with MASK at the slots
        slots: Slot positions and kinds
        mode: Argmax or temperature sampling within the kind's id range
        temperature: Sampling temperature; <= 0 behaves greedily
        seed: Sampling stream seed
        windows: Optional inclusive value range per slot position; choices
            outside it are excluded

    Returns:
        Filled sequence of the same length
    """
    check_vocabulary(model, tokenizer)
    filled = list(masked)
    if not slots:
        return filled
    windows = windows or {}
    vocabulary = tokenizer.vocabulary
    ids = torch.tensor([vocabulary.encode_ids(masked)])
    was_training = model.training
    model.eval()
    with torch.no_grad():
        logits = model(ids)[0]
    model.train(was_training)

    greedy = mode == FillMode.GREEDY or temperature <= 0
    generator = None if greedy else torch_generator(seed, "perform")
    for position, kind in slots:
        span = vocabulary.kind_ids(kind)
        scores = logits[position, span.start:span.stop]
        if position in windows:
            allowed = _allowed_choices(vocabulary.values[kind], windows[position])
            scores = scores.masked_fill(~allowed, float("-inf"))
        if greedy:
            choice = int(torch.argmax(scores))
        else:
            probs = torch.softmax(scores / temperature, dim=-1)
            choice = int(torch.multinomial(probs, 1, generator=generator))
        filled[position] = vocabulary.token(span.start + choice)
    return filled


def apply_performance(tokens: Sequence[Token], model: Performer, tokenizer: PerTok,
                      mode: FillMode = FillMode.GREEDY, temperature: float = 1.0,
                      seed: int = 0) -> List[Token]:
    """
    Expressive rendition of a score sequence.

    Args:
        tokens: Canonical sequence, with or without performance tokens
        model: Performer
        tokenizer: Tokenizer matching the model's vocabulary

    Returns:
        Sequence whose Velocity/MicroShift tokens come from the model

    Raises:
        CheckpointError: On a vocabulary mismatch
        SequenceLengthError: If the slotted sequence is too long for the model
    """
    masked, slots = insert_performance_slots(tokens, tokenizer)
    return fill_slots(model, tokenizer, masked, slots, mode, temperature, seed)


def microshift_windows(slots: Slots, residuals: Sequence[int], limit: int) -> Windows:
    """
    MicroShift values that keep each note within `limit` ticks of its source onset.

    Args:
        slots: Slots from insert_performance_slots, one MicroShift slot per note
        residuals: Source offset of each note from its grid point, in token order
        limit: Largest allowed onset change in ticks
    """
    positions = [position for position, kind in slots if kind == TokenKind.MICRO_SHIFT]
    return {position: (residual - limit, residual + limit) for position, residual in zip(positions, residuals)}


def perform_score(score: Score, model: Performer, tokenizer: PerTok,
                  mode: FillMode = FillMode.GREEDY, temperature: float = 1.0, seed: int = 0) -> Score:
    """
    Encode, infill performance tokens and decode.

    Pitches and durations pass through. Each MicroShift is chosen among the
    buckets that keep the note within max_microshift_ticks of its source
    onset; when no bucket does (a source more than twice that far from its
    grid point) the closest bucket is used. Without MicroShift tokens notes
    land on their grid points.
    """
    tokens = tokenizer.encode(score)
    masked, slots = insert_performance_slots(tokens, tokenizer)
    windows = microshift_windows(slots, tokenizer.onset_residuals(score), tokenizer.config.max_microshift_ticks)
    filled = fill_slots(model, tokenizer, masked, slots, mode, temperature, seed, windows)
    return tokenizer.decode(filled)
