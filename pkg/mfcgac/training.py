"""Actor-critic training loops for the mean field control game.

Four variants share one loop:

- ``baseline``: a single trajectory, TD targets from the live critic
- ``batch``: B parallel agents with a periodically synced target critic
- ``minibatch``: the batch loop over a random partition of the agents into
  minibatches, with Hutchinson trace estimates and infrequent Langevin refreshes
- ``drl``: rollout storage, GAE advantages and clipped PPO actor updates

Each outer step updates the global and local score networks on the agents'
states, refreshes the two particle sets by Langevin dynamics, moves the agents
and updates critic and actor. All random draws come from seed-derived streams
so a run is bitwise reproducible.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from mfcgac._autodiff import AdamState, MlpNet
from mfcgac._random import Stream, derive_rng
from mfcgac.agents import (
    CriticPair,
    GaussianPolicy,
    OraclePolicy,
    RolloutBuffer,
    TransitionBatch,
    critic_loss,
    gae,
    ppo_actor_loss,
    reinforce_actor_loss,
    value_loss,
)
from mfcgac.exceptions import (
    ConfigError,
    DimensionError,
    DivergenceError,
    NonFiniteError,
    RunIOError,
)
from mfcgac.lq import LqEnvironment, MeanFieldEnvironment, analytical_solution
from mfcgac.models import (
    Algorithm,
    MetricsRecord,
    RunManifest,
    TrainConfig,
    TrainingCheckpoint,
    TransitionRecord,
)
from mfcgac.runs import RunDirectory
from mfcgac.score import (
    EmpiricalMeasure,
    MeanFieldSampler,
    score_loss_exact,
    score_loss_hutchinson,
)

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, MetricsRecord], None]


def lr_schedule(step: int, total: int, base: float) -> float:
    """Warm-up then decay learning-rate schedule.

    Rises linearly from ``base`` to ``10*base`` over the first 10% of
    ``total`` steps, then falls linearly to ``0.25*base`` at ``total``.

    Example:
        >>> lr_schedule(0, 1000, 1.0), lr_schedule(100, 1000, 1.0), lr_schedule(1000, 1000, 1.0)
        (1.0, 10.0, 0.25)
    """
    if total <= 0:
        return base
    s = min(max(step, 0), total)
    warm = 0.1 * total
    if s <= warm:
        return base * (1.0 + 9.0 * s / warm)
    return base * (10.0 - 9.75 * (s - warm) / (total - warm))


def partition_minibatches(
    indices: int | np.ndarray, minibatch_size: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Randomly permute the agent indices and cut them into equal blocks.

    Args:
        indices: Agent indices, or the batch size B for ``0..B-1``
        minibatch_size: Block size b
        rng: Generator for the permutation

    Returns:
        C = B / b disjoint index arrays covering every agent

    Raises:
        ConfigError: If b does not divide B
    """
    idx = np.arange(indices) if isinstance(indices, int) else np.asarray(indices)
    size = idx.shape[0]
    if minibatch_size < 1 or size % minibatch_size != 0:
        raise ConfigError(f"batch of {size} cannot be split into minibatches of {minibatch_size}")
    return np.split(rng.permutation(idx), size // minibatch_size)


@dataclass
class UpdateCounters:
    """How often each part of the algorithm ran.

    ``score_updates`` counts rounds that update both score networks;
    ``env_steps`` counts single-agent transitions.
    """

    score_updates: int = 0
    critic_updates: int = 0
    actor_updates: int = 0
    env_steps: int = 0
    langevin_refreshes: int = 0
    target_syncs: int = 0


@dataclass
class TrainArtifacts:
    """Learned objects and history of a finished run."""

    actor: GaussianPolicy | OraclePolicy
    critic: MlpNet
    target: MlpNet
    global_score: MlpNet
    local_score: MlpNet
    metrics: list[MetricsRecord]
    particles_global: EmpiricalMeasure
    particles_local: EmpiricalMeasure
    counters: UpdateCounters
    timings: list[float] = field(default_factory=list)
    last_checkpoint: Path | None = None


class Trainer:
    """Owns the networks, optimizers, particle sets and agents of one run.

    Args:
        cfg: Training configuration
        run_dir: Where to write metrics, checkpoints and particles (optional)
        env: Environment (defaults to the LQ benchmark from ``cfg.lq``)
        actor: Policy to use in place of a freshly initialized GaussianPolicy;
            an OraclePolicy is never updated
        fixed_mean: Freeze both mean fields at this value and skip score
            learning and Langevin sampling
        on_step: Called with ``(step, record)`` after every outer step

    Example:
        >>> trainer = Trainer(TrainConfig(algorithm="batch", steps=10, batch_size=16))
        >>> artifacts = trainer.run()
        >>> len(artifacts.metrics)
        10
    """

    def __init__(
        self,
        cfg: TrainConfig,
        *,
        run_dir: RunDirectory | None = None,
        env: MeanFieldEnvironment | None = None,
        actor: GaussianPolicy | OraclePolicy | None = None,
        fixed_mean: float | None = None,
        on_step: StepCallback | None = None,
    ) -> None:
        """Initialize all learned objects from the seed-derived streams."""
        self.cfg = cfg
        self.run_dir = run_dir
        self.on_step = on_step
        self.fixed_mean = fixed_mean
        self.env: MeanFieldEnvironment = env or LqEnvironment(
            cfg.lq, init_mean=cfg.init_mean, init_std=cfg.init_std
        )
        self.gamma = self.env.discount

        seed = cfg.seed
        self.actor = actor if actor is not None else GaussianPolicy(
            cfg.actor_width, rng=derive_rng(seed, Stream.NETWORK_INIT, 0, 0)
        )
        self.critics = CriticPair(
            cfg.critic_width,
            cfg.effective_target_period,
            rng=derive_rng(seed, Stream.NETWORK_INIT, 0, 1),
        )
        self.global_score = MlpNet(
            [1, cfg.score_width, 1], rng=derive_rng(seed, Stream.NETWORK_INIT, 0, 2)
        )
        self.local_score = MlpNet(
            [1, cfg.score_width, 1], rng=derive_rng(seed, Stream.NETWORK_INIT, 0, 3)
        )
        self.actor_opt = AdamState.zeros(self.actor.params.shape[0])
        self.critic_opt = AdamState.zeros(self.critics.critic.params.shape[0])
        self.global_opt = AdamState.zeros(self.global_score.params.shape[0])
        self.local_opt = AdamState.zeros(self.local_score.params.shape[0])

        self.states = self.env.sample_initial(
            cfg.effective_batch_size, derive_rng(seed, Stream.INITIAL_STATE)
        )
        k = cfg.langevin.particles
        self.global_sampler = MeanFieldSampler(
            cfg.langevin,
            EmpiricalMeasure(self.env.sample_initial(k, derive_rng(seed, Stream.PARTICLES, 0, 0))),
        )
        self.local_sampler = MeanFieldSampler(
            cfg.langevin,
            EmpiricalMeasure(self.env.sample_initial(k, derive_rng(seed, Stream.PARTICLES, 0, 1))),
        )
        self.rollout = RolloutBuffer(cfg.rollout_length) if cfg.algorithm == "drl" else None

        self.step = 0
        self._start_step = 0
        self.metrics: list[MetricsRecord] = []
        self.timings: list[float] = []
        self.counters = UpdateCounters()
        self.last_checkpoint: Path | None = None
        self._last_losses = (0.0, 0.0)
        self._started_at = datetime.now(timezone.utc)

    @classmethod
    def from_checkpoint(
        cls, run_dir: RunDirectory, *, on_step: StepCallback | None = None
    ) -> Trainer:
        """Resume a run from its newest checkpoint.

        Networks, optimizer states, agent states and any unfinished rollout come
        from the checkpoint; particle sets from ``particles_<population>.csv``.
        Particles left by a diverged run, or unreadable ones, are re-drawn from
        the seed-derived streams with a warning.
        """
        cfg = run_dir.read_config()
        ckpt = run_dir.read_checkpoint()
        trainer = cls(cfg, run_dir=run_dir, on_step=on_step)
        trainer.restore(ckpt)
        trainer._restore_particles(ckpt.step)
        try:
            trainer.metrics = run_dir.read_metrics()[: ckpt.step]
        except RunIOError:
            logger.warning("No readable metrics in %s; history restarts at step %d", run_dir.path, ckpt.step)
        logger.info("Resuming %s at step %d", run_dir.path, ckpt.step)
        return trainer

    def restore(self, ckpt: TrainingCheckpoint) -> None:
        pairs: list[tuple[MlpNet, AdamState, Any]] = [
            (self.critics.critic, self.critic_opt, ckpt.critic),
            (self.global_score, self.global_opt, ckpt.global_score),
            (self.local_score, self.local_opt, ckpt.local_score),
        ]
        self.critics.target.load_params(ckpt.target.params)
        for net, _, saved in pairs:
            net.load_params(saved.params)
        self.critic_opt, self.global_opt, self.local_opt = (
            AdamState.from_checkpoint(saved.optimizer) if saved.optimizer is not None else opt
            for _, opt, saved in pairs
        )
        if ckpt.actor is not None and isinstance(self.actor, GaussianPolicy):
            self.actor.load_params(np.asarray(ckpt.actor.params))
            if ckpt.actor.optimizer is not None:
                self.actor_opt = AdamState.from_checkpoint(ckpt.actor.optimizer)
        if ckpt.states is not None:
            states = np.asarray(ckpt.states, dtype=np.float64)
            if states.shape != self.states.shape:
                raise RunIOError(
                    f"checkpoint holds {states.shape[0]} agent states, config expects "
                    f"{self.states.shape[0]}"
                )
            self.states = states
        if self.rollout is not None:
            self.rollout.clear()
            for t in ckpt.rollout:
                fields = (t.states, t.actions, t.rewards, t.next_states, t.log_probs)
                self.rollout.add(TransitionBatch(*(np.asarray(v, dtype=np.float64) for v in fields)))
        self._last_losses = ckpt.last_losses
        self.step = self._start_step = ckpt.step

    def _restore_particles(self, step: int) -> None:
        assert self.run_dir is not None
        try:
            diverged_at = self.run_dir.read_manifest().diverged_at
        except RunIOError:
            diverged_at = None
        if diverged_at is not None:
            logger.warning(
                "Particles in %s were written at divergence (step %d); re-drawing for step %d",
                self.run_dir.path, diverged_at, step,
            )
            return
        samplers = {"global": self.global_sampler, "local": self.local_sampler}
        for population, sampler in samplers.items():
            try:
                meas = self.run_dir.read_particles(population)
            except (RunIOError, NonFiniteError, DimensionError, ValueError) as e:
                logger.warning("Re-drawing %s particles: %s", population, e)
                continue
            if meas.size != self.cfg.langevin.particles:
                logger.warning(
                    "Re-drawing %s particles: file holds %d, config expects %d",
                    population, meas.size, self.cfg.langevin.particles,
                )
                continue
            sampler.measure = meas

    # ------------------------------------------------------------------ loop

    def run(self) -> TrainArtifacts:
        """Train until ``cfg.steps`` outer steps are completed.

        Raises:
            DivergenceError: If a loss, gradient, parameter or particle goes
                non-finite; the manifest records the step and the last
                checkpoint stays on disk
        """
        cfg = self.cfg
        self._started_at = datetime.now(timezone.utc)
        if self.run_dir is not None:
            self.run_dir.write_manifest(self._manifest())
        logger.info(
            "Training %s for %d steps (B=%d, seed=%d)",
            cfg.algorithm, cfg.steps, cfg.effective_batch_size, cfg.seed,
        )
        try:
            while self.step < cfg.steps:
                n = self.step
                started = time.perf_counter()
                record = self._advance(n)
                self.timings.append(time.perf_counter() - started)
                if not record.is_finite():
                    raise NonFiniteError(f"non-finite metrics at step {n}", where="metrics")
                self.metrics.append(record)
                self.step = n + 1
                if n % cfg.log_every == 0:
                    logger.info(
                        "step %d lr x%.3f score %.4g/%.4g critic %.4g actor %.4g mean %.4f/%.4f",
                        n, record.lr_multiplier, record.score_loss_global, record.score_loss_local,
                        record.critic_loss, record.actor_loss, record.mean_global, record.mean_local,
                    )
                if self.on_step is not None:
                    self.on_step(n, record)
                if self.run_dir is not None and self.step % cfg.checkpoint_every == 0:
                    self.save_checkpoint()
        except NonFiniteError as e:
            logger.error("Training diverged at step %d (%s): %s", self.step, e.where, e.message)
            if self.run_dir is not None:
                self._flush()
                self.run_dir.write_manifest(self._manifest(diverged_at=self.step))
            raise DivergenceError(
                f"training diverged at step {self.step}: {e.message}",
                where=e.where,
                step=self.step,
                checkpoint=self.last_checkpoint,
            ) from e

        if self.run_dir is not None:
            if self.last_checkpoint is None or self.last_checkpoint.name != f"step_{self.step}.json":
                self.save_checkpoint()
            self.run_dir.write_manifest(self._manifest(finished=True))
        return self.artifacts()

    def _advance(self, n: int) -> MetricsRecord:
        cfg = self.cfg
        mult = lr_schedule(n, cfg.steps, 1.0)
        if cfg.algorithm == "drl":
            return self._rollout_step(n, mult)

        hutchinson = cfg.algorithm == "minibatch"
        if hutchinson:
            blocks = partition_minibatches(
                self.states.shape[0],
                cfg.minibatch_size,
                derive_rng(cfg.seed, Stream.PERMUTATION, n),
            )
        else:
            blocks = [np.arange(self.states.shape[0])]
        refresh = n % cfg.effective_langevin_period == 0
        losses = np.array(
            [self._update_block(n, j, idx, mult, refresh, hutchinson) for j, idx in enumerate(blocks)]
        )
        if self.critics.sync(n):
            self.counters.target_syncs += 1
        sg, sl, c, a = losses.mean(axis=0)
        return self._record(n, mult, float(sg), float(sl), float(c), float(a))

    def _update_block(
        self, n: int, j: int, idx: np.ndarray, mult: float, refresh: bool, hutchinson: bool
    ) -> tuple[float, float, float, float]:
        cfg = self.cfg
        x = self.states[idx]
        sg, sl = self._update_scores(n, j, x, mult, hutchinson)
        if refresh:
            self._refresh(n, j)
        x_next, a, r, _ = self._interact(n, j, x)

        c_loss, c_grad, delta = critic_loss(
            self.critics.critic, x, r, x_next, self.critics.target, self.gamma
        )
        a_loss = 0.0
        if isinstance(self.actor, GaussianPolicy):
            # delta is a constant for the actor
            a_loss, a_grad = reinforce_actor_loss(self.actor, x, a, delta)
            self.actor_opt.step(self.actor.params, a_grad, cfg.lr_actor * mult)
            self.counters.actor_updates += 1
        self.critic_opt.step(self.critics.critic.params, c_grad, cfg.lr_critic * mult)
        self.counters.critic_updates += 1

        self.states[idx] = x_next
        return sg, sl, c_loss, a_loss

    def _rollout_step(self, n: int, mult: float) -> MetricsRecord:
        assert self.rollout is not None
        x = self.states
        sg, sl = self._update_scores(n, 0, x, mult, False)
        if n % self.cfg.effective_langevin_period == 0:
            self._refresh(n, 0)
        x_next, a, r, logp = self._interact(n, 0, x)
        self.rollout.add(TransitionBatch(x, a, r, x_next, logp))
        self.states = x_next

        # fills exactly when (n + 1) % M == 0 on a fresh run
        if self.rollout.is_full:
            self._last_losses = self._rollout_update(mult)
        if self.critics.sync(n):
            self.counters.target_syncs += 1
        return self._record(n, mult, sg, sl, *self._last_losses)

    def _rollout_update(self, mult: float) -> tuple[float, float]:
        assert self.rollout is not None
        cfg = self.cfg
        lam = cfg.gae_lambda if cfg.use_gae else 0.0
        advantages, returns = gae(self.rollout, self.critics.critic, self.gamma, lam)
        flat = self.rollout.stacked()
        adv, ret = advantages.reshape(-1), returns.reshape(-1)

        c_loss = a_loss = 0.0
        for _ in range(cfg.ppo_epochs):
            if isinstance(self.actor, GaussianPolicy):
                if cfg.use_ppo:
                    a_loss, a_grad = ppo_actor_loss(
                        self.actor, flat.states, flat.actions, flat.log_probs, adv,
                        cfg.clip_eps, cfg.entropy_coef,
                    )
                else:
                    a_loss, a_grad = reinforce_actor_loss(self.actor, flat.states, flat.actions, adv)
                self.actor_opt.step(self.actor.params, a_grad, cfg.lr_actor * mult)
                self.counters.actor_updates += 1
            c_loss, c_grad, _ = value_loss(self.critics.critic, flat.states, ret)
            self.critic_opt.step(self.critics.critic.params, c_grad, cfg.lr_critic * mult)
            self.counters.critic_updates += 1
        self.rollout.clear()
        return c_loss, a_loss

    def _update_scores(
        self, n: int, j: int, x: np.ndarray, mult: float, hutchinson: bool
    ) -> tuple[float, float]:
        if self.fixed_mean is not None:
            return 0.0, 0.0
        cfg = self.cfg
        losses = []
        nets = (
            (self.global_score, self.global_opt, cfg.lr_global_score),
            (self.local_score, self.local_opt, cfg.lr_local_score),
        )
        for k, (net, opt, lr) in enumerate(nets):
            if hutchinson:
                z = derive_rng(cfg.seed, Stream.PROBE, n, 2 * j + k).standard_normal(x.shape[0])
                loss, grad = score_loss_hutchinson(net, x, z)
            else:
                loss, grad = score_loss_exact(net, x)
            opt.step(net.params, grad, lr * mult)
            losses.append(loss)
        self.counters.score_updates += 1
        return losses[0], losses[1]

    def _refresh(self, n: int, j: int) -> None:
        if self.fixed_mean is not None:
            return
        seed = self.cfg.seed
        self.global_sampler.refresh(self.global_score, derive_rng(seed, Stream.LANGEVIN, n, 2 * j))
        self.local_sampler.refresh(self.local_score, derive_rng(seed, Stream.LANGEVIN, n, 2 * j + 1))
        self.counters.langevin_refreshes += 1

    def _means(self) -> tuple[float, float]:
        if self.fixed_mean is not None:
            return self.fixed_mean, self.fixed_mean
        return self.global_sampler.measure.mean, self.local_sampler.measure.mean

    def _interact(
        self, n: int, j: int, x: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Sample actions, collect rewards and move the agents; returns (x', a, r, log-probs)."""
        seed = self.cfg.seed
        m_global, m_local = self._means()
        a, logp = self.actor.sample(x, derive_rng(seed, Stream.POLICY, n, j))
        r = self.env.reward(x, m_global, m_local, a)
        z = derive_rng(seed, Stream.ENVIRONMENT, n, j).standard_normal(x.shape[0])
        x_next = self.env.step(x, a, z)
        self.counters.env_steps += x.shape[0]
        return x_next, a, r, logp

    def _record(
        self, n: int, mult: float, sg: float, sl: float, c_loss: float, a_loss: float
    ) -> MetricsRecord:
        m_global, m_local = self._means()
        frozen = self.fixed_mean is not None
        return MetricsRecord(
            step=n,
            lr_multiplier=mult,
            score_loss_global=sg,
            score_loss_local=sl,
            critic_loss=c_loss,
            actor_loss=a_loss,
            mean_global=m_global,
            mean_local=m_local,
            var_global=0.0 if frozen else self.global_sampler.measure.variance,
            var_local=0.0 if frozen else self.local_sampler.measure.variance,
        )

    # ------------------------------------------------------------------ output

    def checkpoint(self) -> TrainingCheckpoint:
        actor = (
            self.actor.to_checkpoint(self.actor_opt)
            if isinstance(self.actor, GaussianPolicy)
            else None
        )
        return TrainingCheckpoint(
            step=self.step,
            actor=actor,
            critic=self.critics.critic.to_checkpoint(self.critic_opt),
            target=self.critics.target.to_checkpoint(),
            global_score=self.global_score.to_checkpoint(self.global_opt),
            local_score=self.local_score.to_checkpoint(self.local_opt),
            states=self.states.tolist(),
            rollout=[
                TransitionRecord(
                    states=b.states.tolist(),
                    actions=b.actions.tolist(),
                    rewards=b.rewards.tolist(),
                    next_states=b.next_states.tolist(),
                    log_probs=b.log_probs.tolist(),
                )
                for b in (self.rollout.batches if self.rollout is not None else ())
            ],
            last_losses=self._last_losses,
        )

    def save_checkpoint(self) -> Path:
        """Write a checkpoint plus the metrics, timings and particles so far."""
        if self.run_dir is None:
            raise RunIOError("trainer has no run directory to checkpoint into")
        self.last_checkpoint = self.run_dir.write_checkpoint(self.checkpoint())
        self._flush()
        return self.last_checkpoint

    def _flush(self) -> None:
        assert self.run_dir is not None
        self.run_dir.write_metrics(self.metrics)
        self.run_dir.write_timings(self.timings, self._start_step)
        self.run_dir.write_particles("global", self.global_sampler.measure)
        self.run_dir.write_particles("local", self.local_sampler.measure)

    def _manifest(self, *, finished: bool = False, diverged_at: int | None = None) -> RunManifest:
        from mfcgac import __version__

        last = None
        if self.last_checkpoint is not None and self.run_dir is not None:
            last = str(self.last_checkpoint.relative_to(self.run_dir.path))
        done = finished or diverged_at is not None
        return RunManifest(
            algorithm=self.cfg.algorithm,
            seed=self.cfg.seed,
            code_version=__version__,
            started_at=self._started_at,
            finished_at=datetime.now(timezone.utc) if done else None,
            steps_completed=self.step,
            diverged_at=diverged_at,
            last_checkpoint=last,
            seconds_per_step=float(np.mean(self.timings)) if self.timings else None,
        )

    def artifacts(self) -> TrainArtifacts:
        return TrainArtifacts(
            actor=self.actor,
            critic=self.critics.critic,
            target=self.critics.target,
            global_score=self.global_score,
            local_score=self.local_score,
            metrics=list(self.metrics),
            particles_global=self.global_sampler.measure,
            particles_local=self.local_sampler.measure,
            counters=self.counters,
            timings=list(self.timings),
            last_checkpoint=self.last_checkpoint,
        )


def _as_algorithm(cfg: TrainConfig, algorithm: Algorithm) -> TrainConfig:
    if cfg.algorithm == algorithm:
        return cfg
    try:
        return TrainConfig.model_validate({**cfg.model_dump(), "algorithm": algorithm})
    except ValidationError as e:
        raise ConfigError(
            f"config is not valid for {algorithm}", errors=[dict(err) for err in e.errors()]
        ) from e


def train(
    cfg: TrainConfig,
    *,
    run_dir: RunDirectory | None = None,
    on_step: StepCallback | None = None,
) -> TrainArtifacts:
    """Run the algorithm named by ``cfg.algorithm``."""
    return Trainer(cfg, run_dir=run_dir, on_step=on_step).run()


def train_baseline(cfg: TrainConfig, **kwargs: Any) -> TrainArtifacts:
    """Single-trajectory actor-critic; the TD target uses the live critic."""
    return train(_as_algorithm(cfg, "baseline"), **kwargs)


def train_batch(cfg: TrainConfig, **kwargs: Any) -> TrainArtifacts:
    """B parallel agents, batch-averaged losses and a target critic."""
    return train(_as_algorithm(cfg, "batch"), **kwargs)


def train_minibatch(cfg: TrainConfig, **kwargs: Any) -> TrainArtifacts:
    """Batch algorithm over random minibatches with Hutchinson score losses."""
    return train(_as_algorithm(cfg, "minibatch"), **kwargs)


def train_drl(cfg: TrainConfig, **kwargs: Any) -> TrainArtifacts:
    """Rollout-based variant with GAE advantages and PPO actor updates."""
    return train(_as_algorithm(cfg, "drl"), **kwargs)


def train_policy_evaluation(
    cfg: TrainConfig,
    std: float = 0.05,
    *,
    run_dir: RunDirectory | None = None,
    on_step: StepCallback | None = None,
) -> TrainArtifacts:
    """Learn only the critic of the equilibrium policy.

    The actor is frozen at the closed-form control with action noise ``std``
    and both mean fields are frozen at the equilibrium mean, so the critic
    should converge to the closed-form value function.
    """
    batch_cfg = _as_algorithm(cfg, "batch")
    sol = analytical_solution(batch_cfg.lq)
    trainer = Trainer(
        batch_cfg,
        run_dir=run_dir,
        actor=OraclePolicy(sol, std),
        fixed_mean=sol.mean,
        on_step=on_step,
    )
    return trainer.run()
