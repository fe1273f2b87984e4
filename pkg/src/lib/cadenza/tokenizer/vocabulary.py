"""
Vocabulary - Bijective token <-> id tables derived from a TokenizerConfig.

Ids are dense and grouped by kind: PAD=0, BOS, EOS, MASK, then Pitch,
TimeShift, Velocity, MicroShift and Duration values in ascending order. Each
kind occupies one contiguous id range, which lets models restrict an argmax
to a single kind by slicing.
"""

import bisect
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DecodeError
from ..core.token import SPECIAL_KINDS, Token, TokenKind
from .config import TokenizerConfig

KIND_ORDER = (
    TokenKind.PAD, TokenKind.BOS, TokenKind.EOS, TokenKind.MASK,
    TokenKind.PITCH, TokenKind.TIME_SHIFT, TokenKind.VELOCITY,
    TokenKind.MICRO_SHIFT, TokenKind.DURATION,
)


def timeshift_values(config: TokenizerConfig) -> Tuple[int, ...]:
    """
    TimeShift tick values.

    Every grid multiple up to max_timeshift_ticks, plus the multiples of the
    grids' common divisor below the smallest step. The latter bridge gaps
    between positions on different grids (160 - 120 = 40) so that every
    delta between grid points decomposes exactly.
    """
    limit = config.max_timeshift_ticks
    values = {k * g for g in config.grids for k in range(1, limit // g + 1)}
    values.update(range(config.grid_unit, config.min_grid, config.grid_unit))
    return tuple(sorted(values))


def duration_values(config: TokenizerConfig) -> Tuple[int, ...]:
    """Duration tick values: grid multiples up to max_timeshift_ticks."""
    if not config.use_duration:
        return ()
    limit = config.max_timeshift_ticks
    return tuple(sorted({k * g for g in config.grids for k in range(1, limit // g + 1)}))


def microshift_values(config: TokenizerConfig) -> Tuple[int, ...]:
    """Evenly spaced integer offsets spanning +-max_microshift_ticks, including 0."""
    if not config.use_microshift:
        return ()
    spread = config.max_microshift_ticks
    if config.microshift_buckets == 1:
        return (0,)
    offsets = np.rint(np.linspace(-spread, spread, config.microshift_buckets)).astype(int)
    return tuple(int(v) for v in offsets)


def velocity_bucket_bounds(buckets: int) -> Tuple[Tuple[int, int], ...]:
    """Inclusive (low, high) velocity range of each uniform bucket over 1-127."""
    lows = [1 + (b * 126) // buckets for b in range(buckets)]
    highs = [low - 1 for low in lows[1:]] + [127]
    return tuple(zip(lows, highs))


def velocity_values(config: TokenizerConfig) -> Tuple[int, ...]:
    """Bucket centres (midpoint rounded down)."""
    if not config.use_velocity:
        return ()
    return tuple((low + high) // 2 for low, high in velocity_bucket_bounds(config.velocity_buckets))


class Vocabulary:
    """
    Vocabulary - Token tables of one tokenizer configuration.

    Immutable after construction; shared freely between workers.
    """

    def __init__(self, config: TokenizerConfig):
        """
        Build the vocabulary.

        Args:
            config: Tokenizer configuration
        """
        self.config = config
        self.values: Dict[TokenKind, Tuple[int, ...]] = {
            TokenKind.PITCH: tuple(range(config.pitch_min, config.pitch_max + 1)),
            TokenKind.TIME_SHIFT: timeshift_values(config),
            TokenKind.VELOCITY: velocity_values(config),
            TokenKind.MICRO_SHIFT: microshift_values(config),
            TokenKind.DURATION: duration_values(config),
        }
        self.velocity_bounds = velocity_bucket_bounds(config.velocity_buckets) if config.use_velocity else ()
        self._velocity_lows = [low for low, _ in self.velocity_bounds]

        tokens: List[Token] = [Token(kind) for kind in SPECIAL_KINDS]
        self.ranges: Dict[TokenKind, Tuple[int, int]] = {}
        for kind in SPECIAL_KINDS:
            index = KIND_ORDER.index(kind)
            self.ranges[kind] = (index, index + 1)
        for kind in KIND_ORDER[len(SPECIAL_KINDS):]:
            start = len(tokens)
            tokens.extend(Token(kind, value) for value in self.values[kind])
            self.ranges[kind] = (start, len(tokens))
        self.tokens: Tuple[Token, ...] = tuple(tokens)
        self._ids: Dict[Token, int] = {token: index for index, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._ids

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __hash__(self) -> int:
        return hash(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.ranges[TokenKind.PAD][0]

    @property
    def mask_id(self) -> int:
        return self.ranges[TokenKind.MASK][0]

    def counts(self) -> Dict[TokenKind, int]:
        """Number of tokens of every kind."""
        return {kind: stop - start for kind, (start, stop) in self.ranges.items()}

    def kind_ids(self, kind: TokenKind) -> range:
        """Contiguous id range of one kind."""
        start, stop = self.ranges[kind]
        return range(start, stop)

    def kind_of_id(self, index: int) -> TokenKind:
        return self.token(index).kind

    def id(self, token: Token, position: Optional[int] = None) -> int:
        """
        Id of a token.

        Raises:
            DecodeError: If the token is not in this vocabulary
        """
        try:
            return self._ids[token]
        except KeyError:
            raise DecodeError(f"token {token} is not in the vocabulary", position) from None

    def token(self, index: int, position: Optional[int] = None) -> Token:
        """
        Token of an id.

        Raises:
            DecodeError: If the id is out of range
        """
        if not 0 <= index < len(self.tokens):
            raise DecodeError(f"unknown token id {index}", position)
        return self.tokens[index]

    def encode_ids(self, tokens: Sequence[Token]) -> List[int]:
        return [self.id(token, position) for position, token in enumerate(tokens)]

    def decode_ids(self, ids: Iterable[int]) -> List[Token]:
        return [self.token(int(index), position) for position, index in enumerate(ids)]

    def velocity_token(self, velocity: int) -> Token:
        """Velocity token of the bucket containing a MIDI velocity."""
        return Token(TokenKind.VELOCITY, self.values[TokenKind.VELOCITY][self.velocity_bucket(velocity)])

    def velocity_bucket(self, velocity: int) -> int:
        return max(bisect.bisect_right(self._velocity_lows, velocity) - 1, 0)


@lru_cache(maxsize=32)
def build_vocabulary(config: TokenizerConfig) -> Vocabulary:
    """
    Build (or fetch the cached) Vocabulary of a configuration.

    Colliding grid multiples are merged, never an error.
    """
    return Vocabulary(config)
