"""Shared test fixtures and utilities for fading-bc tests."""

import tempfile
from pathlib import Path
from typing import Generator

import pytest

from fading_bc.fading_model import CsitMap, build_discrete, partition_by_csit
from fading_bc.policy_optimizer import OptimizerOptions


@pytest.fixture
def test_configs_dir() -> Path:
    """Return the path to the sample run configs directory."""
    return Path(__file__).parent / "configs"


@pytest.fixture
def temp_output_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for test outputs."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def symmetric_dist():
    """Two equiprobable atoms with the receivers' roles swapped."""
    return build_discrete([(3.0, 1.0, 0.5), (1.0, 3.0, 0.5)])


@pytest.fixture
def symmetric_degradedness(symmetric_dist):
    return partition_by_csit(symmetric_dist, CsitMap.degradedness_bit())


@pytest.fixture
def single_atom():
    """Degraded single-state channel (g1, g2) = (3, 1), no CSIT needed."""
    return partition_by_csit(build_discrete([(3.0, 1.0, 1.0)], iid=True), CsitMap.none())


@pytest.fixture
def small_opts() -> OptimizerOptions:
    """Optimizer settings small enough for unit tests."""
    return OptimizerOptions(
        directions=8, restarts=3, grid_seed_levels=3, step_tol=1e-5, max_iters=100
    )
