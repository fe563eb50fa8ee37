"""Store the classes and fixtures used throughout the tests."""

import numpy as np
import pytest

from shrinklab.adapters import corpus_group
from shrinklab.fgroup import FiniteGroup
from shrinklab.model import ShrinklabConfig


@pytest.fixture(name="config")
def fixture_config() -> ShrinklabConfig:
    """Return the default caps."""
    return ShrinklabConfig()


@pytest.fixture(name="rng")
def fixture_rng() -> np.random.Generator:
    """Return a seeded random stream."""
    return np.random.default_rng(2023)


@pytest.fixture(name="c2")
def fixture_c2(config: ShrinklabConfig) -> FiniteGroup:
    """Return the cyclic group of order two."""
    return corpus_group("C2", config=config)


@pytest.fixture(name="c3")
def fixture_c3(config: ShrinklabConfig) -> FiniteGroup:
    """Return the cyclic group of order three."""
    return corpus_group("C3", config=config)


@pytest.fixture(name="s3")
def fixture_s3(config: ShrinklabConfig) -> FiniteGroup:
    """Return the symmetric group on three points."""
    return corpus_group("S3", config=config)
