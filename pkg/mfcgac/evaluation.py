"""Errors of learned objects against the closed-form equilibrium.

Learned value function and policy mean are compared with the closed-form
value and control on a grid; particle sets are compared with the limiting
Gaussian law through moment errors and the Kolmogorov-Smirnov statistic.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from scipy import stats

from mfcgac._autodiff import MlpNet
from mfcgac.agents import GaussianPolicy, OraclePolicy, Policy
from mfcgac.exceptions import ConfigError
from mfcgac.lq import analytical_solution, optimal_control, value_function
from mfcgac.models import AggregateReport, AnalyticalSolution, GridSpec, MetricsReport
from mfcgac.runs import RunDirectory
from mfcgac.score import EmpiricalMeasure

REPORT_FIELDS = [name for name in MetricsReport.model_fields if name != "seed"]


def _points(grid: GridSpec | np.ndarray) -> np.ndarray:
    return grid.points() if isinstance(grid, GridSpec) else np.asarray(grid, dtype=np.float64)


def default_grid(sol: AnalyticalSolution, step: float = 0.01) -> GridSpec:
    """Four limiting standard deviations either side of the equilibrium mean.

    A degenerate limiting law (sigma = 0) gets a half-width of 1.
    """
    half = 4.0 * sol.limit_std or 1.0
    return GridSpec(lower=sol.mean - half, upper=sol.mean + half, step=step)


def eval_value(
    critic: MlpNet, sol: AnalyticalSolution, grid: GridSpec | np.ndarray
) -> tuple[float, float]:
    """Sup and root-mean-square errors of the critic against the closed-form value.

    Example:
        >>> sol = analytical_solution(LqParams())
        >>> sup, l2 = eval_value(MlpNet([1, 8, 1]), sol, np.array([0.0]))
        >>> sup == l2 == abs(sol.gamma0)
        True
    """
    x = _points(grid)
    err = critic.scalar(x) - value_function(x, sol)
    return float(np.max(np.abs(err))), float(np.sqrt(np.mean(err * err)))


def eval_policy(actor: Policy, sol: AnalyticalSolution, grid: GridSpec | np.ndarray) -> float:
    """Sup error of the policy mean against the closed-form control."""
    x = _points(grid)
    return float(np.max(np.abs(actor.mean(x) - optimal_control(x, sol))))


def ks_statistic(meas: EmpiricalMeasure, sol: AnalyticalSolution) -> float:
    """Two-sided KS distance between the particles and the limiting Gaussian.

    A degenerate limiting law (sigma = 0) is a point mass; the distance is then
    the larger of the particle fractions strictly below and strictly above it.
    """
    if sol.limit_std == 0.0:
        x = meas.particles
        return float(max(np.mean(x < sol.limit_mean), np.mean(x > sol.limit_mean)))
    result = stats.kstest(meas.particles, "norm", args=(sol.limit_mean, sol.limit_std))
    return float(result.statistic)


def eval_distribution(
    meas: EmpiricalMeasure, sol: AnalyticalSolution
) -> tuple[float, float, float]:
    """Mean error, standard-deviation error and KS statistic of a particle set.

    Returns:
        (|mean - m|, |std - sigma/(2*sqrt(Gamma_2))|, KS statistic)
    """
    std = math.sqrt(meas.variance)
    return (
        abs(meas.mean - sol.mean),
        abs(std - sol.limit_std),
        ks_statistic(meas, sol),
    )


def build_report(
    critic: MlpNet,
    actor: Policy,
    particles_global: EmpiricalMeasure,
    particles_local: EmpiricalMeasure,
    sol: AnalyticalSolution,
    grid: GridSpec | np.ndarray,
    seed: int | None = None,
) -> MetricsReport:
    value_sup, value_l2 = eval_value(critic, sol, grid)
    mean_g, std_g, ks_g = eval_distribution(particles_global, sol)
    mean_l, std_l, ks_l = eval_distribution(particles_local, sol)
    return MetricsReport(
        seed=seed,
        value_sup_error=value_sup,
        value_l2_error=value_l2,
        policy_sup_error=eval_policy(actor, sol, grid),
        mean_error_global=mean_g,
        mean_error_local=mean_l,
        std_error_global=std_g,
        std_error_local=std_l,
        ks_global=ks_g,
        ks_local=ks_l,
    )


def aggregate_runs(reports: Sequence[MetricsReport]) -> AggregateReport:
    """Mean and sample standard deviation (0 for a single run) of every error.

    Raises:
        ConfigError: If ``reports`` is empty
    """
    if not reports:
        raise ConfigError("cannot aggregate zero runs")
    table = np.array([[getattr(r, f) for f in REPORT_FIELDS] for r in reports], dtype=np.float64)
    means = table.mean(axis=0)
    stds = table.std(axis=0, ddof=1) if len(reports) > 1 else np.zeros(len(REPORT_FIELDS))
    return AggregateReport(
        runs=list(reports),
        mean=dict(zip(REPORT_FIELDS, means.tolist(), strict=True)),
        std=dict(zip(REPORT_FIELDS, stds.tolist(), strict=True)),
    )


def curve_rows(
    critic: MlpNet, actor: Policy, sol: AnalyticalSolution, grid: GridSpec | np.ndarray
) -> list[dict[str, float]]:
    """Plot-ready rows of learned and closed-form value and control per grid point."""
    x = _points(grid)
    columns = zip(
        x.tolist(),
        critic.scalar(x).tolist(),
        np.asarray(value_function(x, sol)).tolist(),
        actor.mean(x).tolist(),
        np.asarray(optimal_control(x, sol)).tolist(),
        strict=True,
    )
    return [
        {
            "x": xi,
            "value_learned": v,
            "value_analytical": v_true,
            "control_learned": c,
            "control_analytical": c_true,
        }
        for xi, v, v_true, c, c_true in columns
    ]


def evaluate_run(
    run_dir: RunDirectory, grid: GridSpec | None = None
) -> tuple[MetricsReport, list[dict[str, float]]]:
    """Evaluate the newest checkpoint and final particle sets of a run.

    Runs without a stored actor (policy evaluation) are scored against the
    equilibrium policy itself.

    Returns:
        (report, eval.csv rows)
    """
    cfg = run_dir.read_config()
    sol = analytical_solution(cfg.lq)
    ckpt = run_dir.read_checkpoint()
    critic, _ = MlpNet.from_checkpoint(ckpt.critic)
    actor: Policy
    if ckpt.actor is not None:
        actor, _ = GaussianPolicy.from_checkpoint(ckpt.actor)
    else:
        actor = OraclePolicy(sol)
    points = grid if grid is not None else default_grid(sol)
    report = build_report(
        critic,
        actor,
        run_dir.read_particles("global"),
        run_dir.read_particles("local"),
        sol,
        points,
        seed=cfg.seed,
    )
    return report, curve_rows(critic, actor, sol, points)
