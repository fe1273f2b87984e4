"""
Validated, immutable configuration models.

All Cadenza configs are pydantic models with field constraints. Invalid
values surface as ConfigurationError rather than pydantic's ValidationError
so callers deal with a single error hierarchy.
"""

from typing import Any, Dict, Type, TypeVar

from pydantic import BaseModel, ConfigDict, ValidationError

from .errors import ConfigurationError

T = TypeVar("T", bound="ConfigModel")


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"])
        parts.append(f"{location}: {error['msg']}" if location else error["msg"])
    return "; ".join(parts)


class ConfigModel(BaseModel):
    """Frozen config base rejecting unknown keys."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as exc:
            raise ConfigurationError(f"Invalid {type(self).__name__}: {_describe(exc)}") from None

    @classmethod
    def from_dict(cls: Type[T], data: Dict[str, Any]) -> T:
        """Build from a mapping (e.g. a YAML section)."""
        if not isinstance(data, dict):
            raise ConfigurationError(f"{cls.__name__} section must be a mapping, got {type(data).__name__}")
        if not all(isinstance(key, str) for key in data):
            raise ConfigurationError(f"{cls.__name__} keys must be strings")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        """Plain JSON/YAML-safe mapping of every field."""
        return self.model_dump(mode="json")

    def replace(self: T, **changes: Any) -> T:
        """Validated copy with some fields changed."""
        return type(self)(**{**self.to_dict(), **changes})
