"""
Command-line surface and run configuration.
"""

from .cli import cli, main, setup_logging
from .run_config import RunConfig, load_run_config

__all__ = ["RunConfig", "cli", "load_run_config", "main", "setup_logging"]
