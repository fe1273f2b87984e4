"""
Grammar-constrained generation from the composer.

At every step the next-token distribution is restricted to the token kinds
the PerTok grammar allows, to pitches above the previous pitch of the same
chord, and to TimeShift values no larger than the previous one in a run.
The result is normalized with canonicalize().
"""

import logging
from enum import Enum
from typing import List, Optional

import torch

from ..core.note_event import Score
from ..core.token import Token, TokenKind
from ..numerics.rng import stream, torch_generator
from ..tokenizer.grammar import PerformanceSlots, TokenGrammar
from ..tokenizer.pertok import PerTok, strip_performance
from .model import Composer

logger = logging.getLogger(__name__)


class DecodeMode(Enum):
    """Next-token selection."""
    GREEDY = "greedy"
    SAMPLE = "sample"  # temperature + top-p


def top_p_filter(logits: torch.Tensor, top_p: float) -> torch.Tensor:
    """Keep the smallest set of tokens whose probability mass reaches top_p."""
    if top_p >= 1.0:
        return logits
    sorted_logits, order = torch.sort(logits, descending=True)
    cumulative = torch.softmax(sorted_logits, dim=-1).cumsum(dim=-1)
    drop = cumulative > top_p
    drop[1:] = drop[:-1].clone()
    drop[0] = False
    filtered = logits.clone()
    filtered[order[drop]] = float("-inf")
    return filtered


class _Constraints:
    """Tracks chord pitch order and TimeShift run order on top of the grammar."""

    def __init__(self, tokenizer: PerTok):
        self.vocabulary = tokenizer.vocabulary
        self.grammar = TokenGrammar(tokenizer.config, PerformanceSlots.ABSENT)
        self.last_pitch: Optional[int] = None
        self.last_shift: Optional[int] = None

    def allowed_ids(self) -> torch.Tensor:
        allowed = torch.zeros(len(self.vocabulary), dtype=torch.bool)
        values = self.vocabulary.values
        for kind in self.grammar.allowed() - {TokenKind.PAD}:
            start, stop = self.vocabulary.ranges[kind]
            if kind == TokenKind.PITCH and self.last_pitch is not None:
                start += sum(1 for v in values[kind] if v <= self.last_pitch)
            elif kind == TokenKind.TIME_SHIFT and self.last_shift is not None:
                stop = start + sum(1 for v in values[kind] if v <= self.last_shift)
            allowed[start:stop] = True
        return allowed

    def accept(self, token: Token) -> None:
        self.grammar.advance(token.kind)
        if token.kind == TokenKind.PITCH:
            self.last_pitch = token.value
            self.last_shift = None
        elif token.kind == TokenKind.TIME_SHIFT:
            self.last_shift = token.value
            self.last_pitch = None

    @property
    def can_end(self) -> bool:
        return TokenKind.EOS in self.grammar.allowed()


def generate(model: Composer, z: torch.Tensor, tokenizer: PerTok,
             mode: DecodeMode = DecodeMode.GREEDY, max_len: Optional[int] = None,
             temperature: float = 1.0, top_p: float = 0.9, seed: int = 0) -> List[Token]:
    """
    Decode a score-token sequence from a latent vector.

    Args:
        model: Trained composer
        z: Latent Tensor[d_z]
        tokenizer: Tokenizer whose vocabulary the model was trained on
        mode: Greedy or temperature + top-p sampling
        max_len: Length limit including BOS/EOS (defaults to max_seq_len)
        temperature: Sampling temperature; <= 0 behaves greedily
        top_p: Nucleus mass for sampling
        seed: Sampling stream seed

    Returns:
        Canonical score-only token sequence
    """
    max_len = min(max_len or model.config.max_seq_len, model.config.max_seq_len)
    vocabulary = tokenizer.vocabulary
    bos_id = vocabulary.id(Token(TokenKind.BOS))
    eos_id = vocabulary.id(Token(TokenKind.EOS))
    generator = torch_generator(seed, "generate") if mode == DecodeMode.SAMPLE else None
    greedy = mode == DecodeMode.GREEDY or temperature <= 0

    constraints = _Constraints(tokenizer)
    constraints.accept(Token(TokenKind.BOS))
    ids = [bos_id]
    last_complete = len(ids)
    z = z.reshape(1, -1).to(model.embedding.weight.dtype)
    was_training = model.training
    model.eval()
    with torch.no_grad():
        while len(ids) < max_len - 1:
            logits = model.decode_forward(torch.tensor([ids]), z)[0, -1]
            logits = logits.masked_fill(~constraints.allowed_ids(), float("-inf"))
            if greedy:
                next_id = int(torch.argmax(logits))
            else:
                probs = torch.softmax(top_p_filter(logits / temperature, top_p), dim=-1)
                next_id = int(torch.multinomial(probs, 1, generator=generator))
            token = vocabulary.token(next_id)
            constraints.accept(token)
            ids.append(next_id)
            if token.kind == TokenKind.EOS:
                break
            if constraints.can_end:
                last_complete = len(ids)
    model.train(was_training)

    if ids[-1] != eos_id:
        logger.debug("Generation hit the %d-token limit; closing after the last complete note", max_len)
        ids = ids[:last_complete] + [eos_id]
    return tokenizer.canonicalize(vocabulary.decode_ids(ids))


def encode_score_latent(model: Composer, tokenizer: PerTok, score: Score) -> torch.Tensor:
    """Posterior mean of a score's score-token sequence."""
    ids = tokenizer.vocabulary.encode_ids(strip_performance(tokenizer.encode(score)))
    was_training = model.training
    model.eval()
    with torch.no_grad():
        h = model.encode_latent(torch.tensor([ids]))
        latent = model.reparameterize(h)
    model.train(was_training)
    return latent.mu[0]


def sample_prior(latent_dz: int, seed: int) -> torch.Tensor:
    """z ~ N(0, I) from the seeded stream."""
    return torch.from_numpy(stream(seed, "prior").standard_normal(latent_dz)).float()


def vary(model: Composer, tokenizer: PerTok, score: Optional[Score] = None,
         mode: DecodeMode = DecodeMode.GREEDY, seed: int = 0, unconditional: bool = False,
         temperature: float = 1.0, top_p: float = 0.9) -> Score:
    """
    Generate a variation of a score, or an unconditional score.

    The input reaches the decoder only through its latent mean; decoding
    always starts from BOS.
    """
    if unconditional or score is None:
        z = sample_prior(model.config.latent_dz, seed)
    else:
        z = encode_score_latent(model, tokenizer, score)
    tokens = generate(model, z, tokenizer, mode, temperature=temperature, top_p=top_p, seed=seed)
    return tokenizer.decode(tokens)
