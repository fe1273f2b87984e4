"""
RunConfig - The YAML run configuration shared by every subcommand.

    schema_version: 1
    seed: 0
    tokenizer: {...}   # TokenizerConfig fields
    composer: {...}    # ComposerConfig fields
    performer: {...}   # PerformerConfig fields
    training: {...}    # TrainingConfig fields

Missing sections take their defaults; unknown keys are rejected. Every
command writes the resolved configuration next to its output as
`<output>.config.yaml`; passing that file back with --config reruns the
command identically.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from pydantic import Field

from ..composer.config import ComposerConfig
from ..core.config_model import ConfigModel
from ..core.errors import ConfigurationError
from ..numerics.training import TrainingConfig
from ..performer.config import PerformerConfig
from ..tokenizer.config import TokenizerConfig

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class RunConfig(ConfigModel):
    """Resolved configuration of one command run."""

    schema_version: Literal[1] = SCHEMA_VERSION
    seed: int = 0
    tokenizer: TokenizerConfig = Field(default_factory=TokenizerConfig)
    composer: ComposerConfig = Field(default_factory=ComposerConfig)
    performer: PerformerConfig = Field(default_factory=PerformerConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    command: Optional[Dict[str, Any]] = None  # provenance only, ignored on load

    def with_section(self, section: str, **changes: Any) -> "RunConfig":
        """Copy with some fields of one section changed; None values are ignored."""
        changes = {key: value for key, value in changes.items() if value is not None}
        if not changes:
            return self
        current = getattr(self, section)
        return self.replace(**{section: current.replace(**changes).to_dict()})

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


def load_run_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Read a run configuration file, or the defaults when no path is given.

    Raises:
        ConfigurationError: On unreadable YAML, a wrong schema version or
            invalid values
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must be a mapping at the top level")
    if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigurationError(
            f"config {path} has schema_version {data['schema_version']}, expected {SCHEMA_VERSION}")
    data = {key: value for key, value in data.items() if key != "command"}
    logger.debug("Loaded run config from %s", path)
    return RunConfig.from_dict(data)
