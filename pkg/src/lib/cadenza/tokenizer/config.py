"""
TokenizerConfig - Grids, bucket counts and feature flags of a PerTok tokenizer.
"""

from math import gcd
from typing import Any, Tuple

from pydantic import Field, model_validator

from ..core.config_model import ConfigModel


class TokenizerConfig(ConfigModel):
    """
    PerTok tokenizer configuration.

    Grid steps are in ticks at `ticks_per_quarter`: a 16th is TPQ/4, an
    8th-note triplet TPQ/3 and a quarter-note triplet 2*TPQ/3.
    `max_timeshift_ticks` defaults to one 4/4 bar (4*TPQ).
    """

    ticks_per_quarter: int = Field(default=480, gt=0)
    grids: Tuple[int, ...] = (120, 160)
    max_microshift_ticks: int = Field(default=30, ge=0)
    microshift_buckets: int = Field(default=31, ge=1)
    velocity_buckets: int = Field(default=32, ge=1, le=126)
    use_duration: bool = True
    use_velocity: bool = True
    use_microshift: bool = True
    pitch_min: int = Field(default=0, ge=0, le=127)
    pitch_max: int = Field(default=127, ge=0, le=127)
    max_timeshift_ticks: int = Field(default=1920, gt=0)
    default_velocity: int = Field(default=100, ge=1, le=127)

    @model_validator(mode="before")
    @classmethod
    def _default_timeshift_limit(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("max_timeshift_ticks") is None:
            data = dict(data)
            data["max_timeshift_ticks"] = 4 * int(data.get("ticks_per_quarter", 480))
        return data

    @model_validator(mode="after")
    def _check_consistency(self) -> "TokenizerConfig":
        if not self.grids:
            raise ValueError("grids must not be empty")
        if any(g <= 0 for g in self.grids):
            raise ValueError(f"grid steps must be positive, got {self.grids}")
        if len(set(self.grids)) != len(self.grids):
            raise ValueError(f"grid steps must be distinct, got {self.grids}")
        if self.min_grid > self.max_timeshift_ticks:
            raise ValueError("max_timeshift_ticks must be at least the smallest grid step")
        if 2 * self.max_microshift_ticks >= self.min_grid:
            raise ValueError(
                f"max_microshift_ticks {self.max_microshift_ticks} must be below half the "
                f"smallest grid step {self.min_grid}")
        if self.microshift_buckets % 2 == 0:
            raise ValueError("microshift_buckets must be odd so that a zero bucket exists")
        if self.microshift_buckets > 2 * self.max_microshift_ticks + 1:
            raise ValueError(
                f"microshift_buckets {self.microshift_buckets} exceeds the "
                f"{2 * self.max_microshift_ticks + 1} distinct tick offsets available")
        if self.pitch_min > self.pitch_max:
            raise ValueError("pitch_min must not exceed pitch_max")
        return self

    @property
    def min_grid(self) -> int:
        return min(self.grids)

    @property
    def grid_unit(self) -> int:
        """Greatest common divisor of all grid steps."""
        return gcd(*self.grids)

    @property
    def performance_enabled(self) -> bool:
        return self.use_velocity or self.use_microshift
