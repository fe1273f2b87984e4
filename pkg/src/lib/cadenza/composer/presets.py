"""
Named KL-regularization presets for the ablation study.
"""

from typing import Dict

from ..core.errors import ConfigurationError
from .config import ComposerConfig

# name -> (beta_max, free_bit_lambda)
ABLATION_PRESETS: Dict[str, tuple] = {
    "no-kl": (0.0, 0.0),
    "balanced-kl": (0.3, 0.25),
    "full-kl": (1.0, 0.15),
}


def preset_config(name: str, base: ComposerConfig) -> ComposerConfig:
    """
    Base configuration with a preset's KL weight and free-bits floor.

    Raises:
        ConfigurationError: If the preset is unknown
    """
    if name not in ABLATION_PRESETS:
        raise ConfigurationError(f"Unknown preset {name!r}; choose from {', '.join(ABLATION_PRESETS)}")
    beta_max, free_bits = ABLATION_PRESETS[name]
    return base.replace(beta_max=beta_max, free_bit_lambda=free_bits)
