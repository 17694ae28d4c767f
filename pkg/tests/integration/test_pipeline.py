"""End-to-end tests: the CLI pipeline and desk-scale convergence runs.

The convergence runs take tens of CPU minutes and only run when
MFCGAC_RUN_SLOW is set.
"""

import json

import pytest

from mfcgac import (
    RunDirectory,
    TrainConfig,
    analytical_solution,
    evaluate_run,
    train,
    train_policy_evaluation,
)
from mfcgac.cli import main


@pytest.mark.integration
def test_train_eval_sweep(tmp_path, small_config_file, capsys):
    """Test the train, eval and sweep commands on one small configuration."""
    first, second = tmp_path / "a", tmp_path / "b"
    base = ["train", "--algo", "batch", "--config", str(small_config_file), "--seed", "1"]
    assert main([*base, "--out", str(first)]) == 0
    assert main([*base, "--out", str(second)]) == 0
    assert (first / "metrics.csv").read_bytes() == (second / "metrics.csv").read_bytes()

    capsys.readouterr()
    assert main(["eval", "--run", str(first)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["seed"] == 1
    assert (first / "eval.csv").is_file()

    sweep = tmp_path / "sweep"
    args = ["sweep", "--out", str(sweep), "--seeds", "2", "--config", str(small_config_file)]
    assert main([*args, "--algo", "minibatch", "--steps", "2", "--workers", "2"]) == 0
    assert json.loads((sweep / "sweep.json").read_text())["mean"].keys() == report.keys() - {"seed"}


def _assert_converged(run: RunDirectory) -> None:
    cfg = run.read_config()
    sol = analytical_solution(cfg.lq)
    report, _ = evaluate_run(run)
    tol = 0.1 * abs(sol.mean) + 0.02
    assert report.mean_error_global <= tol
    assert report.mean_error_local <= tol
    assert report.std_error_global <= 0.25 * sol.limit_std
    assert report.std_error_local <= 0.25 * sol.limit_std
    assert report.value_sup_error <= 0.15


@pytest.mark.integration
@pytest.mark.slow
def test_policy_evaluation_converges(tmp_path, run_slow):
    """Test the critic of the equilibrium policy reaches the closed-form value."""
    cfg = TrainConfig(algorithm="batch", steps=20_000, batch_size=1024)
    run = RunDirectory.create(tmp_path / "pe", cfg)
    train_policy_evaluation(cfg, run_dir=run)
    report, _ = evaluate_run(run)
    assert report.value_sup_error <= 0.1


@pytest.mark.integration
@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_batch_converges(tmp_path, run_slow, seed):
    """Test the batch algorithm approaches the equilibrium in 100k steps."""
    cfg = TrainConfig(algorithm="batch", steps=100_000, batch_size=1024, seed=seed)
    run = RunDirectory.create(tmp_path / f"batch-{seed}", cfg)
    train(cfg, run_dir=run)
    _assert_converged(run)


@pytest.mark.integration
@pytest.mark.slow
def test_minibatch_converges(tmp_path, run_slow):
    """Test the minibatch algorithm approaches the equilibrium in 10k steps."""
    cfg = TrainConfig(algorithm="minibatch", steps=10_000, batch_size=1024, minibatch_size=128)
    run = RunDirectory.create(tmp_path / "minibatch", cfg)
    train(cfg, run_dir=run)
    _assert_converged(run)
