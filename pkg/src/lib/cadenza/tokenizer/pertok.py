"""
PerTok tokenizer - Encode Scores as composition + performance tokens and back.

Each note becomes

    TimeShift* Pitch [Velocity] [MicroShift] [Duration]

where the TimeShift run moves between quantized onsets, and MicroShift
carries the note's signed deviation from its quantized position.
"""

import logging
from typing import List, Optional, Sequence, Tuple

from ..core.errors import DecodeError, EncodeError
from ..core.note_event import NoteEvent, Score
from ..core.token import BOS, EOS, MASK, Token, TokenKind
from .config import TokenizerConfig
from .grammar import PerformanceSlots, TokenGrammar
from .quantize import decompose_timeshift, nearest_duration, nearest_microshift, quantize_onset
from .vocabulary import Vocabulary, build_vocabulary

logger = logging.getLogger(__name__)

MaskTargets = List[Tuple[int, int]]


class PerTok:
    """
    PerTok - Tokenizer bound to one configuration.

    Immutable after construction; all methods are pure.
    """

    def __init__(self, config: Optional[TokenizerConfig] = None):
        """
        Initialize tokenizer.

        Args:
            config: Tokenizer configuration (defaults: TPQ 480, 16th and
                8th-triplet grids, 32 velocity and 31 microshift buckets)
        """
        self.config = config or TokenizerConfig()
        self.vocabulary: Vocabulary = build_vocabulary(self.config)

    def __repr__(self) -> str:
        return f"PerTok(vocab={len(self.vocabulary)}, grids={self.config.grids})"

    def quantize(self, onset_ticks: int) -> Tuple[int, int]:
        return quantize_onset(onset_ticks, self.config)

    def encode(self, score: Score) -> List[Token]:
        """
        Encode a Score.

        Args:
            score: Score at the configured resolution

        Returns:
            Canonical token sequence framed by BOS/EOS

        Raises:
            EncodeError: On a resolution mismatch or a pitch outside the range
        """
        config = self.config
        if score.ticks_per_quarter != config.ticks_per_quarter:
            raise EncodeError(
                f"score resolution {score.ticks_per_quarter} differs from tokenizer "
                f"resolution {config.ticks_per_quarter}")
        values = self.vocabulary.values
        placed = self._placed_notes(score)

        tokens = [BOS]
        position = 0
        for grid_tick, pitch, _, velocity, duration, residual in placed:
            for shift in decompose_timeshift(grid_tick - position, values[TokenKind.TIME_SHIFT]):
                tokens.append(Token(TokenKind.TIME_SHIFT, shift))
            position = grid_tick
            tokens.append(Token(TokenKind.PITCH, pitch))
            if config.use_velocity:
                tokens.append(self.vocabulary.velocity_token(velocity))
            if config.use_microshift:
                tokens.append(Token(TokenKind.MICRO_SHIFT,
                                    nearest_microshift(residual, values[TokenKind.MICRO_SHIFT])))
            if config.use_duration:
                tokens.append(Token(TokenKind.DURATION,
                                    nearest_duration(duration, values[TokenKind.DURATION])))
        tokens.append(EOS)
        return tokens

    def _placed_notes(self, score: Score) -> List[Tuple[int, int, int, int, int, int]]:
        """(grid tick, pitch, onset, velocity, duration, residual) per note, in token order."""
        config = self.config
        placed = []
        for index, note in enumerate(score.notes):
            if not config.pitch_min <= note.pitch <= config.pitch_max:
                raise EncodeError(
                    f"pitch outside range {config.pitch_min}-{config.pitch_max}", index, note)
            grid_tick, residual = quantize_onset(note.onset_ticks, config)
            placed.append((grid_tick, note.pitch, note.onset_ticks, note.velocity,
                           note.duration_ticks, residual))
        placed.sort()
        return placed

    def onset_residuals(self, score: Score) -> List[int]:
        """Exact offset of each note from its grid point, in the order encode emits the notes."""
        return [entry[5] for entry in self._placed_notes(score)]

    def decode(self, tokens: Sequence[Token]) -> Score:
        """
        Decode a token sequence.

        Missing performance tokens fall back to the default velocity and a
        zero microshift; a missing duration to the smallest grid step.

        Args:
            tokens: Sequence drawn from this vocabulary

        Returns:
            Decoded Score at the configured resolution

        Raises:
            DecodeError: On unknown tokens or token kinds out of order
        """
        config = self.config
        grammar = TokenGrammar(config, PerformanceSlots.OPTIONAL)
        notes: List[NoteEvent] = []
        position = 0
        pending: Optional[List[int]] = None  # [pitch, onset, velocity, microshift, duration]

        def flush() -> None:
            if pending is not None:
                pitch, onset, velocity, shift, duration = pending
                notes.append(NoteEvent(pitch, max(onset + shift, 0), duration, velocity))

        for index, token in enumerate(tokens):
            if token not in self.vocabulary:
                raise DecodeError(f"token {token} is not in the vocabulary", index)
            grammar.advance(token.kind, index)
            kind = token.kind
            if kind == TokenKind.TIME_SHIFT:
                position += token.value
            elif kind == TokenKind.PITCH:
                flush()
                pending = [token.value, position, config.default_velocity, 0, config.min_grid]
            elif kind == TokenKind.VELOCITY:
                pending[2] = token.value
            elif kind == TokenKind.MICRO_SHIFT:
                pending[3] = token.value
            elif kind == TokenKind.DURATION:
                pending[4] = token.value
            elif kind == TokenKind.EOS:
                flush()
                pending = None
        if not grammar.complete:
            raise DecodeError("sequence does not end with EOS", len(tokens))
        return Score.from_notes(config.ticks_per_quarter, notes)

    def encode_ids(self, score: Score) -> List[int]:
        return self.vocabulary.encode_ids(self.encode(score))

    def decode_ids(self, ids: Sequence[int]) -> Score:
        return self.decode(self.vocabulary.decode_ids(ids))

    def strip_performance(self, tokens: Sequence[Token]) -> List[Token]:
        return strip_performance(tokens)

    def mask_performance(self, tokens: Sequence[Token]) -> Tuple[List[Token], MaskTargets]:
        return mask_performance(tokens, self.vocabulary)

    def canonicalize(self, tokens: Sequence[Token]) -> List[Token]:
        """
        Normal form of a grammar-valid sequence: encode(decode(tokens)).

        Sequences without performance tokens stay score-only.
        """
        canonical = self.encode(self.decode(tokens))
        if not any(t.kind.is_performance for t in tokens):
            canonical = strip_performance(canonical)
        return canonical

    def is_canonical(self, tokens: Sequence[Token]) -> bool:
        """True if the sequence is its own normal form."""
        try:
            return list(tokens) == self.canonicalize(tokens)
        except DecodeError:
            return False


def strip_performance(tokens: Sequence[Token]) -> List[Token]:
    """Drop Velocity and MicroShift tokens, leaving the score-only sequence."""
    return [t for t in tokens if not t.kind.is_performance]


def mask_performance(tokens: Sequence[Token], vocabulary: Vocabulary) -> Tuple[List[Token], MaskTargets]:
    """
    Replace every performance token by MASK, in place.

    Args:
        tokens: Token sequence
        vocabulary: Vocabulary used to report the original ids

    Returns:
        (masked sequence of the same length, [(position, original id), ...])
    """
    masked = list(tokens)
    targets: MaskTargets = []
    for position, token in enumerate(tokens):
        if token.kind.is_performance:
            targets.append((position, vocabulary.id(token, position)))
            masked[position] = MASK
    return masked, targets


def encode(score: Score, config: TokenizerConfig) -> List[Token]:
    return PerTok(config).encode(score)


def decode(tokens: Sequence[Token], config: TokenizerConfig) -> Score:
    return PerTok(config).decode(tokens)


def canonicalize(tokens: Sequence[Token], config: TokenizerConfig) -> List[Token]:
    return PerTok(config).canonicalize(tokens)
