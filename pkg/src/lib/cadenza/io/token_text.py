"""
Token text format - the interchange format between CLI stages.

One token per line as `Kind_value` (`TimeShift_120`, `MicroShift_-15`) or a
bare special (`BOS`, `EOS`, `PAD`, `MASK`). Blank lines are ignored.
"""

from pathlib import Path
from typing import TYPE_CHECKING, Iterable, List, Union

from ..core.errors import DecodeError
from ..core.token import Token

if TYPE_CHECKING:
    from ..tokenizer.vocabulary import Vocabulary


def format_tokens(tokens: Iterable[Token]) -> str:
    """Render tokens one per line, newline terminated."""
    lines = [str(token) for token in tokens]
    return "\n".join(lines) + "\n" if lines else ""


def parse_tokens(text: str) -> List[Token]:
    """
    Parse token text.

    Args:
        text: Token text, one token per line

    Returns:
        Tokens in file order

    Raises:
        DecodeError: If a line is not a well-formed token
    """
    tokens = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            tokens.append(Token.parse(line))
        except ValueError as exc:
            raise DecodeError(f"line {line_number}: {exc}", len(tokens)) from None
    return tokens


def format_vocabulary(vocabulary: "Vocabulary") -> str:
    """Vocabulary export: `id<TAB>Kind_value`, one entry per line, id-sorted."""
    return "".join(f"{index}\t{token}\n" for index, token in enumerate(vocabulary.tokens))


def read_tokens(path: Union[str, Path]) -> List[Token]:
    return parse_tokens(Path(path).read_text(encoding="utf-8"))


def write_tokens(tokens: Iterable[Token], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_tokens(tokens), encoding="utf-8")
    return path
