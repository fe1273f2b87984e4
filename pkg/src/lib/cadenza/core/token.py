"""
PerTok tokens - Token kinds and token values.

A token is a (kind, value) pair. Composition tokens (TimeShift, Pitch,
Duration) carry the score; performance tokens (Velocity, MicroShift) carry
the expressive detail layered on top of it. Special tokens frame and pad
sequences and mark slots the performer has to fill.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence


class TokenKind(Enum):
    """Token kinds of the PerTok vocabulary."""

    # Special
    PAD = "PAD"
    BOS = "BOS"
    EOS = "EOS"
    MASK = "MASK"

    # Composition
    TIME_SHIFT = "TimeShift"
    PITCH = "Pitch"
    DURATION = "Duration"

    # Performance
    VELOCITY = "Velocity"
    MICRO_SHIFT = "MicroShift"

    @property
    def is_special(self) -> bool:
        return self in SPECIAL_KINDS

    @property
    def is_performance(self) -> bool:
        return self in PERFORMANCE_KINDS


SPECIAL_KINDS = (TokenKind.PAD, TokenKind.BOS, TokenKind.EOS, TokenKind.MASK)
PERFORMANCE_KINDS = (TokenKind.VELOCITY, TokenKind.MICRO_SHIFT)
COMPOSITION_KINDS = (TokenKind.TIME_SHIFT, TokenKind.PITCH, TokenKind.DURATION)

_KIND_BY_NAME = {kind.value: kind for kind in TokenKind}


@dataclass(frozen=True)
class Token:
    """
    A single vocabulary element.

    Attributes:
        kind: Token kind
        value: Ticks for TimeShift/MicroShift/Duration, MIDI pitch for Pitch,
            bucket-centre velocity for Velocity, None for specials
    """

    kind: TokenKind
    value: Optional[int] = None

    def __post_init__(self):
        if self.kind.is_special and self.value is not None:
            raise ValueError(f"{self.kind.value} tokens carry no value")
        if not self.kind.is_special and self.value is None:
            raise ValueError(f"{self.kind.value} tokens need a value")

    def __str__(self) -> str:
        """Text form `Kind_value`, or the bare kind for specials."""
        if self.value is None:
            return self.kind.value
        return f"{self.kind.value}_{self.value}"

    def __repr__(self) -> str:
        return f"Token({self})"

    @classmethod
    def parse(cls, text: str) -> "Token":
        """
        Parse the `Kind_value` text form.

        Args:
            text: Token text, e.g. `MicroShift_-15` or `BOS`

        Returns:
            Parsed token

        Raises:
            ValueError: If the kind is unknown or the value is not an integer
        """
        text = text.strip()
        if text in _KIND_BY_NAME:
            return cls(_KIND_BY_NAME[text])
        name, sep, raw_value = text.partition("_")
        if not sep or name not in _KIND_BY_NAME:
            raise ValueError(f"Unknown token: {text!r}")
        try:
            value = int(raw_value)
        except ValueError:
            raise ValueError(f"Invalid token value in {text!r}") from None
        return cls(_KIND_BY_NAME[name], value)


PAD = Token(TokenKind.PAD)
BOS = Token(TokenKind.BOS)
EOS = Token(TokenKind.EOS)
MASK = Token(TokenKind.MASK)

TokenSequence = List[Token]


def kinds(tokens: Sequence[Token]) -> List[TokenKind]:
    """Kind of every token, in order."""
    return [t.kind for t in tokens]
