"""Test exception classes."""

from pathlib import Path

import pytest

from mfcgac.exceptions import (
    ConfigError,
    DimensionError,
    DivergenceError,
    MfcgError,
    NonFiniteError,
    OracleUndefinedError,
    RolloutNotFullError,
    RunIOError,
)


@pytest.mark.unit
def test_base_exception():
    """Test base MfcgError."""
    error = MfcgError("Something went wrong")
    assert str(error) == "Something went wrong"
    assert error.message == "Something went wrong"


@pytest.mark.unit
def test_config_error():
    """Test ConfigError with field errors."""
    errors = [
        {"loc": ("batch_size",), "msg": "not divisible"},
        {"loc": ("lq", "beta"), "msg": "must be > 0"},
    ]
    error = ConfigError("Invalid config", errors=errors)
    assert len(error.errors) == 2
    assert error.errors[1]["loc"] == ("lq", "beta")
    assert ConfigError("no details").errors == []


@pytest.mark.unit
def test_divergence_error_metadata():
    """Test DivergenceError carries step, location and checkpoint."""
    error = DivergenceError(
        "diverged",
        where="langevin",
        step=42,
        checkpoint=Path("run/checkpoints/step_40.json"),
    )
    assert error.where == "langevin"
    assert error.step == 42
    assert error.checkpoint == Path("run/checkpoints/step_40.json")
    assert isinstance(error, NonFiniteError)


@pytest.mark.unit
def test_run_io_error_path():
    """Test RunIOError records the path involved."""
    error = RunIOError("cannot read", path=Path("metrics.csv"))
    assert error.path == Path("metrics.csv")


@pytest.mark.unit
def test_exception_inheritance():
    """Test that all exceptions inherit from MfcgError."""
    for cls in (
        ConfigError,
        DimensionError,
        NonFiniteError,
        DivergenceError,
        OracleUndefinedError,
        RolloutNotFullError,
        RunIOError,
    ):
        assert issubclass(cls, MfcgError)
