"""
TokenGrammar - Incremental validator of PerTok token order.

    sequence := BOS note* EOS PAD*
    note     := TimeShift* Pitch [Velocity] [MicroShift] [Duration]

The optional per-note kinds follow the tokenizer flags. The same state
machine drives decode validation, grammar-constrained generation and
performance-slot insertion.
"""

from enum import Enum
from typing import FrozenSet, List, Optional, Sequence, Tuple

from ..core.errors import DecodeError
from ..core.token import Token, TokenKind
from .config import TokenizerConfig


class PerformanceSlots(Enum):
    """How performance tokens are treated inside a note."""
    REQUIRED = "required"  # every enabled performance kind follows each Pitch
    OPTIONAL = "optional"  # enabled performance kinds may be left out
    ABSENT = "absent"      # score-only sequences


class _Phase(Enum):
    START = "start"
    BODY = "body"
    SHIFT = "shift"
    NOTE = "note"
    END = "end"


_BETWEEN_NOTES = frozenset({TokenKind.TIME_SHIFT, TokenKind.PITCH, TokenKind.EOS})


class TokenGrammar:
    """
    Token Grammar - State machine over token kinds.

    Feed kinds one at a time with advance(); allowed() lists the kinds that
    may come next.
    """

    def __init__(self, config: TokenizerConfig,
                 performance: PerformanceSlots = PerformanceSlots.OPTIONAL):
        """
        Initialize grammar.

        Args:
            config: Tokenizer configuration (decides which per-note kinds exist)
            performance: Treatment of Velocity/MicroShift slots
        """
        self.performance = performance
        self.note_slots: List[Tuple[TokenKind, bool]] = []
        if performance != PerformanceSlots.ABSENT:
            required = performance == PerformanceSlots.REQUIRED
            if config.use_velocity:
                self.note_slots.append((TokenKind.VELOCITY, required))
            if config.use_microshift:
                self.note_slots.append((TokenKind.MICRO_SHIFT, required))
        if config.use_duration:
            self.note_slots.append((TokenKind.DURATION, True))
        self.reset()

    def reset(self) -> None:
        self.phase = _Phase.START
        self.slot = 0

    @property
    def complete(self) -> bool:
        """True once EOS has been accepted."""
        return self.phase == _Phase.END

    def allowed(self) -> FrozenSet[TokenKind]:
        """Kinds that may follow the tokens seen so far."""
        if self.phase == _Phase.START:
            return frozenset({TokenKind.BOS})
        if self.phase == _Phase.BODY:
            return _BETWEEN_NOTES
        if self.phase == _Phase.SHIFT:
            return frozenset({TokenKind.TIME_SHIFT, TokenKind.PITCH})
        if self.phase == _Phase.END:
            return frozenset({TokenKind.PAD})
        kinds = set()
        for kind, required in self.note_slots[self.slot:]:
            kinds.add(kind)
            if required:
                return frozenset(kinds)
        return frozenset(kinds) | _BETWEEN_NOTES

    def advance(self, kind: TokenKind, index: Optional[int] = None) -> None:
        """
        Accept the next token kind.

        Args:
            kind: Kind of the next token
            index: Position of the token, for error reporting

        Raises:
            DecodeError: If the kind is not allowed here
        """
        allowed = self.allowed()
        if kind not in allowed:
            expected = ", ".join(sorted(k.value for k in allowed))
            raise DecodeError(f"{kind.value} not allowed here (expected {expected})", index)
        if kind == TokenKind.BOS:
            self.phase = _Phase.BODY
        elif kind == TokenKind.TIME_SHIFT:
            self.phase = _Phase.SHIFT
        elif kind == TokenKind.PITCH:
            self.phase = _Phase.NOTE
            self.slot = 0
        elif kind in (TokenKind.EOS, TokenKind.PAD):
            self.phase = _Phase.END
        else:
            slot_kinds = [k for k, _ in self.note_slots]
            self.slot = slot_kinds.index(kind, self.slot) + 1

    def validate(self, tokens: Sequence[Token]) -> None:
        """
        Check a whole sequence from the start.

        Raises:
            DecodeError: On the first grammar violation, or a missing EOS
        """
        self.reset()
        for index, token in enumerate(tokens):
            self.advance(token.kind, index)
        if not self.complete:
            raise DecodeError("sequence does not end with EOS", len(tokens))
