"""
Shared pytest fixtures.
"""

import pytest

from cadenza.tokenizer.config import TokenizerConfig
from cadenza.tokenizer.pertok import PerTok

import factories


@pytest.fixture
def default_tokenizer() -> PerTok:
    """TPQ 480, 16th + 8th-triplet grids, 32 velocity and 31 microshift buckets."""
    return PerTok(TokenizerConfig())


@pytest.fixture
def score_tokenizer() -> PerTok:
    return PerTok(factories.score_config())


@pytest.fixture
def performance_tokenizer() -> PerTok:
    return PerTok(factories.performance_config())
