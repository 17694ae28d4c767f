"""Pydantic models shared across the package.

Configuration (LQ coefficients, Langevin sampling, training), per-step
metrics, evaluation reports and the JSON checkpoint/manifest schemas all live
here so that every file a run writes has one declared shape.
"""

from __future__ import annotations

import math
from datetime import datetime
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

Algorithm = Literal["baseline", "batch", "minibatch", "drl"]
OutputActivation = Literal["identity", "tanh"]
HeadMap = Literal["identity", "softplus"]


class LqParams(BaseModel):
    """Coefficients of the linear-quadratic benchmark.

    The running cost is
    ``0.5*a**2 + c1*(x - c2*m)**2 + c3*(x - c4)**2 + ct1*(x - ct2*m_loc)**2 + ct5*m_loc**2``
    and the dynamics are ``dX = a dt + sigma dW``. Defaults are the benchmark
    values; ``sigma`` and ``dt`` are not fixed by the benchmark and default to
    0.5 and 0.01.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    c1: float = 0.5
    c2: float = 1.5
    c3: float = 0.5
    c4: float = 0.25
    ct1: float = 0.3
    ct2: float = 1.25
    ct5: float = 0.25
    beta: Annotated[float, Field(gt=0.0)] = 1.0
    sigma: Annotated[float, Field(ge=0.0)] = 0.5
    dt: Annotated[float, Field(gt=0.0)] = 0.01

    @property
    def denominator(self) -> float:
        """D = c1(1-c2) + ct1(1-ct2)^2 + c3 + ct5."""
        return self.c1 * (1.0 - self.c2) + self.ct1 * (1.0 - self.ct2) ** 2 + self.c3 + self.ct5

    @model_validator(mode="after")
    def _check_denominator(self) -> LqParams:
        if self.denominator == 0.0:
            raise ValueError("denominator c1(1-c2) + ct1(1-ct2)^2 + c3 + ct5 must be non-zero")
        return self


class AnalyticalSolution(BaseModel):
    """Closed-form equilibrium of the LQ benchmark.

    The value function is ``gamma2*x**2 + gamma1*x + gamma0``, the optimal
    control is ``-(2*gamma2*x + gamma1)`` and both mean-field laws converge to
    ``N(limit_mean, limit_variance)``.
    """

    model_config = ConfigDict(frozen=True)

    gamma2: float
    gamma1: float
    gamma0: float
    mean: float
    limit_mean: float
    limit_variance: float

    @property
    def limit_std(self) -> float:
        return math.sqrt(self.limit_variance)


class LangevinConfig(BaseModel):
    """Langevin Monte Carlo settings for mean-field sampling."""

    model_config = ConfigDict(extra="forbid")

    step_size: Annotated[float, Field(ge=0.0)] = 0.05
    iterations: Annotated[int, Field(ge=0)] = 200
    particles: Annotated[int, Field(ge=1)] = 1000
    warm_start: bool = True
    divergence_bound: Annotated[float, Field(gt=0.0)] = 1e6


class TrainConfig(BaseModel):
    """Full hyperparameter set of a training run.

    Defaults reproduce the benchmark configuration. Learning rates may be zero
    to freeze a network. ``minibatch_size`` must divide ``batch_size`` when the
    minibatch algorithm is selected.

    Example:
        >>> cfg = TrainConfig(algorithm="minibatch", batch_size=1024, minibatch_size=128)
        >>> cfg.effective_langevin_period
        50
    """

    model_config = ConfigDict(extra="forbid")

    algorithm: Algorithm = "batch"
    steps: Annotated[int, Field(ge=0)] = 200_000
    batch_size: Annotated[int, Field(ge=1)] = 8192
    minibatch_size: Annotated[int, Field(ge=1)] = 1024
    rollout_length: Annotated[int, Field(ge=1)] = 256

    lr_actor: Annotated[float, Field(ge=0.0)] = 5e-6
    lr_critic: Annotated[float, Field(ge=0.0)] = 1e-5
    lr_global_score: Annotated[float, Field(ge=0.0)] = 1e-6
    lr_local_score: Annotated[float, Field(ge=0.0)] = 5e-4

    clip_eps: Annotated[float, Field(gt=0.0)] = 0.2
    entropy_coef: Annotated[float, Field(ge=0.0)] = 0.01
    gae_lambda: Annotated[float, Field(ge=0.0, le=1.0)] = 0.95
    ppo_epochs: Annotated[int, Field(ge=1)] = 1
    use_ppo: bool = True
    use_gae: bool = True

    target_sync_period: Annotated[int, Field(ge=1)] = 200
    langevin: LangevinConfig = Field(default_factory=LangevinConfig)
    langevin_period: Annotated[int, Field(ge=1)] | None = None

    lq: LqParams = Field(default_factory=LqParams)
    init_mean: float = 0.0
    init_std: Annotated[float, Field(ge=0.0)] = 1.0

    actor_width: Annotated[int, Field(ge=1)] = 64
    critic_width: Annotated[int, Field(ge=1)] = 128
    score_width: Annotated[int, Field(ge=1)] = 128

    checkpoint_every: Annotated[int, Field(ge=1)] = 10_000
    log_every: Annotated[int, Field(ge=1)] = 1_000
    seed: Annotated[int, Field(ge=0)] = 0

    @model_validator(mode="after")
    def _check_minibatch(self) -> TrainConfig:
        if self.algorithm == "minibatch" and self.batch_size % self.minibatch_size != 0:
            raise ValueError(
                f"batch_size {self.batch_size} is not divisible by "
                f"minibatch_size {self.minibatch_size}"
            )
        return self

    @property
    def effective_batch_size(self) -> int:
        """Number of environment copies; the baseline runs a single trajectory."""
        return 1 if self.algorithm == "baseline" else self.batch_size

    @property
    def effective_target_period(self) -> int:
        """The baseline has no target network, realized as a sync after every step."""
        return 1 if self.algorithm == "baseline" else self.target_sync_period

    @property
    def effective_langevin_period(self) -> int:
        if self.langevin_period is not None:
            return self.langevin_period
        return 50 if self.algorithm == "minibatch" else 1

    @property
    def minibatch_count(self) -> int:
        if self.algorithm != "minibatch":
            return 1
        return self.batch_size // self.minibatch_size


class MetricsRecord(BaseModel):
    """One row of ``metrics.csv``: training statistics of one outer step."""

    step: int
    lr_multiplier: float
    score_loss_global: float
    score_loss_local: float
    critic_loss: float
    actor_loss: float
    mean_global: float
    mean_local: float
    var_global: float
    var_local: float

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.model_dump().values())


class GridSpec(BaseModel):
    """Evaluation grid ``lower, lower+step, ...`` up to ``upper`` inclusive."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    lower: float
    upper: float
    step: Annotated[float, Field(gt=0.0)]

    @model_validator(mode="after")
    def _check_bounds(self) -> GridSpec:
        if not self.lower < self.upper:
            raise ValueError(f"lower ({self.lower}) must be below upper ({self.upper})")
        return self

    @classmethod
    def parse(cls, text: str) -> GridSpec:
        """Parse the CLI form ``lo:hi:step``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like lo:hi:step, got {text!r}")
        lower, upper, step = (float(p) for p in parts)
        return cls(lower=lower, upper=upper, step=step)

    def points(self) -> np.ndarray:
        count = int(math.floor((self.upper - self.lower) / self.step + 1e-9)) + 1
        return self.lower + self.step * np.arange(count, dtype=np.float64)


class MetricsReport(BaseModel):
    """Errors of one trained run against the analytical equilibrium."""

    seed: int | None = None
    value_sup_error: Annotated[float, Field(ge=0.0)]
    value_l2_error: Annotated[float, Field(ge=0.0)]
    policy_sup_error: Annotated[float, Field(ge=0.0)]
    mean_error_global: Annotated[float, Field(ge=0.0)]
    mean_error_local: Annotated[float, Field(ge=0.0)]
    std_error_global: Annotated[float, Field(ge=0.0)]
    std_error_local: Annotated[float, Field(ge=0.0)]
    ks_global: Annotated[float, Field(ge=0.0, le=1.0)]
    ks_local: Annotated[float, Field(ge=0.0, le=1.0)]


class AggregateReport(BaseModel):
    """Mean and sample standard deviation of each report field over seeds."""

    runs: list[MetricsReport]
    mean: dict[str, float]
    std: dict[str, float]

    @property
    def n_runs(self) -> int:
        return len(self.runs)


class NetArchitecture(BaseModel):
    """Layer widths and activations of one MLP."""

    model_config = ConfigDict(extra="forbid")

    sizes: list[int]
    output_activation: OutputActivation = "identity"
    head: HeadMap = "identity"


class AdamCheckpoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: list[float]
    v: list[float]
    t: int
    beta1: float
    beta2: float
    eps: float


class NetCheckpoint(BaseModel):
    """Architecture, flat parameters and optional optimizer state of one network."""

    model_config = ConfigDict(extra="forbid")

    architecture: NetArchitecture
    params: list[float]
    optimizer: AdamCheckpoint | None = None


class PolicyCheckpoint(BaseModel):
    """Gaussian policy: trunk, mean head and std head sharing one parameter vector."""

    model_config = ConfigDict(extra="forbid")

    trunk: NetArchitecture
    mean_head: NetArchitecture
    std_head: NetArchitecture
    params: list[float]
    optimizer: AdamCheckpoint | None = None


class TransitionRecord(BaseModel):
    """One stored environment step of B agents, as plain lists."""

    model_config = ConfigDict(extra="forbid")

    states: list[float]
    actions: list[float]
    rewards: list[float]
    next_states: list[float]
    log_probs: list[float]


class TrainingCheckpoint(BaseModel):
    """Everything needed to resume a run at ``step``.

    Besides the networks this holds the agents' states, the unfinished rollout
    of a ``drl`` run and the losses it reports until its next update. Particle
    sets live next to the checkpoints in ``particles_<population>.csv``.
    """

    model_config = ConfigDict(extra="forbid")

    step: int
    actor: PolicyCheckpoint | None = None
    critic: NetCheckpoint
    target: NetCheckpoint
    global_score: NetCheckpoint
    local_score: NetCheckpoint
    states: list[float] | None = None
    rollout: list[TransitionRecord] = Field(default_factory=list)
    last_losses: tuple[float, float] = (0.0, 0.0)


class RunManifest(BaseModel):
    """Provenance of a run directory."""

    algorithm: Algorithm
    seed: int
    code_version: str
    started_at: datetime
    finished_at: datetime | None = None
    steps_completed: int = 0
    diverged_at: int | None = None
    last_checkpoint: str | None = None
    seconds_per_step: float | None = None
