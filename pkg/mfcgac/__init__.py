"""Actor-critic solvers for infinite-horizon mean field control games.

Four training algorithms (single trajectory, batch, minibatch and a PPO/GAE
variant) learn a value function, a Gaussian policy and two score networks
that represent the global and local mean-field laws. The linear-quadratic
benchmark and its closed-form equilibrium serve as environment and oracle.

Example:
    >>> from mfcgac import TrainConfig, analytical_solution, train
    >>> sol = analytical_solution(TrainConfig().lq)
    >>> round(sol.mean, 7)
    0.2409639
    >>> artifacts = train(TrainConfig(algorithm="batch", steps=100, batch_size=64))
    >>> len(artifacts.metrics)
    100
"""

from mfcgac._autodiff import AdamState, MlpNet, adam_step
from mfcgac.evaluation import (
    aggregate_runs,
    default_grid,
    eval_distribution,
    eval_policy,
    eval_value,
    evaluate_run,
)
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
from mfcgac.lq import (
    LqEnvironment,
    analytical_solution,
    discount_factor,
    env_step,
    hjb_residual,
    optimal_control,
    reward,
    running_cost,
    value_function,
)
from mfcgac.models import (
    AggregateReport,
    AnalyticalSolution,
    GridSpec,
    LangevinConfig,
    LqParams,
    MetricsRecord,
    MetricsReport,
    TrainConfig,
)
from mfcgac.runs import RunDirectory, load_train_config
from mfcgac.score import (
    EmpiricalMeasure,
    MeanFieldSampler,
    langevin_sample,
    score_loss_exact,
    score_loss_hutchinson,
)
from mfcgac.training import (
    TrainArtifacts,
    Trainer,
    lr_schedule,
    partition_minibatches,
    train,
    train_baseline,
    train_batch,
    train_drl,
    train_minibatch,
    train_policy_evaluation,
)

__version__ = "0.1.0"

__all__ = [
    # Version info
    "__version__",
    # Networks and optimizer
    "MlpNet",
    "AdamState",
    "adam_step",
    # LQ benchmark
    "LqParams",
    "LqEnvironment",
    "AnalyticalSolution",
    "analytical_solution",
    "running_cost",
    "reward",
    "env_step",
    "discount_factor",
    "optimal_control",
    "value_function",
    "hjb_residual",
    # Mean-field sampling
    "EmpiricalMeasure",
    "MeanFieldSampler",
    "LangevinConfig",
    "langevin_sample",
    "score_loss_exact",
    "score_loss_hutchinson",
    # Training
    "TrainConfig",
    "Trainer",
    "TrainArtifacts",
    "MetricsRecord",
    "lr_schedule",
    "partition_minibatches",
    "train",
    "train_baseline",
    "train_batch",
    "train_minibatch",
    "train_drl",
    "train_policy_evaluation",
    # Evaluation and runs
    "GridSpec",
    "MetricsReport",
    "AggregateReport",
    "RunDirectory",
    "load_train_config",
    "eval_value",
    "eval_policy",
    "eval_distribution",
    "aggregate_runs",
    "default_grid",
    "evaluate_run",
    # Exceptions
    "MfcgError",
    "ConfigError",
    "DimensionError",
    "NonFiniteError",
    "DivergenceError",
    "OracleUndefinedError",
    "RolloutNotFullError",
    "RunIOError",
]
