"""
PerformerConfig - Shape of the masked performance encoder.
"""

from typing import Optional

from pydantic import Field, model_validator

from ..core.config_model import ConfigModel
from ..core.errors import ConfigurationError


class PerformerConfig(ConfigModel):
    """
    Performer configuration.

    Defaults are the full-size encoder (12 layers, 12 heads, d=768,
    dropout 0.1). `vocab_size` is filled from the tokenizer when unset.
    """

    layers: int = Field(default=12, ge=1)
    heads: int = Field(default=12, ge=1)
    hidden_d: int = Field(default=768, ge=2)
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)
    max_seq_len: int = Field(default=512, ge=2)
    vocab_size: Optional[int] = Field(default=None, ge=5)
    ff_mult: int = Field(default=4, ge=1)

    @model_validator(mode="after")
    def _check_shape(self) -> "PerformerConfig":
        if self.hidden_d % self.heads:
            raise ValueError(f"hidden_d {self.hidden_d} is not divisible by heads {self.heads}")
        if self.hidden_d % 2:
            raise ValueError("hidden_d must be even for sinusoidal positions")
        return self

    def with_vocabulary(self, vocab_size: int) -> "PerformerConfig":
        """
        Bind the config to a vocabulary size.

        Raises:
            ConfigurationError: If a different vocab_size is already set
        """
        if self.vocab_size is not None and self.vocab_size != vocab_size:
            raise ConfigurationError(f"vocab_size {self.vocab_size} does not match vocabulary of {vocab_size}")
        return self.replace(vocab_size=vocab_size)
