"""Pytest configuration and shared fixtures."""

import os
from pathlib import Path

import numpy as np
import pytest

from mfcgac import AnalyticalSolution, LangevinConfig, LqParams, TrainConfig, analytical_solution


@pytest.fixture(scope="session")
def run_slow() -> None:
    """Skip desk-scale runs unless MFCGAC_RUN_SLOW is set."""
    if not os.getenv("MFCGAC_RUN_SLOW"):
        pytest.skip("MFCGAC_RUN_SLOW not set")


@pytest.fixture
def lq_params() -> LqParams:
    """Benchmark coefficients with sigma=0.5 and dt=0.01."""
    return LqParams()


@pytest.fixture
def solution(lq_params: LqParams) -> AnalyticalSolution:
    """Closed-form equilibrium of the benchmark."""
    return analytical_solution(lq_params)


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def small_config() -> TrainConfig:
    """A configuration small enough to train in well under a second."""
    return TrainConfig(
        algorithm="batch",
        steps=5,
        batch_size=16,
        minibatch_size=4,
        rollout_length=2,
        langevin=LangevinConfig(iterations=5, particles=50),
        actor_width=8,
        critic_width=8,
        score_width=8,
        checkpoint_every=1000,
        log_every=1000,
        seed=7,
    )


@pytest.fixture
def small_config_file(tmp_path: Path, small_config: TrainConfig) -> Path:
    """The small configuration written as JSON."""
    path = tmp_path / "config.json"
    path.write_text(small_config.model_dump_json())
    return path

