"""
ComposerConfig - Shape, regularization and annealing settings of the composer VAE.
"""

from typing import Optional

from pydantic import Field, model_validator

from ..core.config_model import ConfigModel
from ..core.errors import ConfigurationError
from .schedule import beta_schedule


class ComposerConfig(ConfigModel):
    """
    Composer configuration.

    Defaults are the full-size model (12 layers, 8 heads, d=512, d_z=128);
    desk-scale runs override them. `vocab_size` is filled from the
    tokenizer when left unset.
    """

    layers: int = Field(default=12, ge=1)
    heads: int = Field(default=8, ge=1)
    hidden_d: int = Field(default=512, ge=2)
    latent_dz: int = Field(default=128, ge=1)
    max_seq_len: int = Field(default=512, ge=2)
    vocab_size: Optional[int] = Field(default=None, ge=5)
    ff_mult: int = Field(default=4, ge=1)
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)
    rope_base: float = Field(default=10000.0, gt=1.0)

    free_bit_lambda: float = Field(default=0.25, ge=0.0)
    beta_max: float = Field(default=0.3, ge=0.0)
    beta_warmup_steps: int = Field(default=25000, ge=0)
    beta_ramp_steps: int = Field(default=25000, ge=0)
    beta_cycle_steps: int = Field(default=10000, ge=0)

    @model_validator(mode="after")
    def _check_shape(self) -> "ComposerConfig":
        if self.hidden_d % self.heads:
            raise ValueError(f"hidden_d {self.hidden_d} is not divisible by heads {self.heads}")
        if (self.hidden_d // self.heads) % 2:
            raise ValueError("head dimension hidden_d / heads must be even for rotary embeddings")
        if self.latent_dz > self.hidden_d:
            raise ValueError(f"latent_dz {self.latent_dz} exceeds hidden_d {self.hidden_d}")
        return self

    def with_vocabulary(self, vocab_size: int) -> "ComposerConfig":
        """
        Bind the config to a vocabulary size.

        Raises:
            ConfigurationError: If a different vocab_size is already set
        """
        if self.vocab_size is not None and self.vocab_size != vocab_size:
            raise ConfigurationError(f"vocab_size {self.vocab_size} does not match vocabulary of {vocab_size}")
        return self.replace(vocab_size=vocab_size)

    def beta_at(self, step: int) -> float:
        return beta_schedule(step, self.beta_max, self.beta_warmup_steps,
                             self.beta_ramp_steps, self.beta_cycle_steps)
