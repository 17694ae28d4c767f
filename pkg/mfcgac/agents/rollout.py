"""Rollout storage, advantage estimation and actor losses.

Advantages and TD errors enter the actor losses as constants: the gradient
is taken through the policy's log-probabilities (and entropy) only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mfcgac._autodiff import MlpNet
from mfcgac.agents.policy import GaussianPolicy
from mfcgac.exceptions import DimensionError, NonFiniteError, RolloutNotFullError


@dataclass(frozen=True)
class TransitionBatch:
    """One environment step of B parallel agents.

    Attributes:
        states: X_t, shape (B,)
        actions: A_t
        rewards: r_t
        next_states: X_{t+1}
        log_probs: log pi_old(A_t | X_t) recorded at collection time
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    log_probs: np.ndarray

    def __post_init__(self) -> None:
        fields = ("states", "actions", "rewards", "next_states", "log_probs")
        arrays = [np.asarray(getattr(self, f), dtype=np.float64).reshape(-1) for f in fields]
        if len({a.shape for a in arrays}) != 1:
            raise DimensionError(
                "transition arrays differ in length: "
                + ", ".join(f"{f}={a.shape[0]}" for f, a in zip(fields, arrays, strict=True))
            )
        for f, a in zip(fields, arrays, strict=True):
            if not np.all(np.isfinite(a)):
                raise NonFiniteError(f"non-finite {f} in transition", where="rollout")
            object.__setattr__(self, f, a)

    def __len__(self) -> int:
        return int(self.states.shape[0])


class RolloutBuffer:
    """Fixed-capacity storage of M consecutive transition batches.

    Example:
        >>> buf = RolloutBuffer(2)
        >>> buf.is_full
        False
    """

    def __init__(self, capacity: int) -> None:
        """Initialize an empty buffer."""
        if capacity < 1:
            raise DimensionError(f"rollout capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._batches: list[TransitionBatch] = []

    def __len__(self) -> int:
        return len(self._batches)

    @property
    def is_full(self) -> bool:
        return len(self._batches) == self.capacity

    def add(self, batch: TransitionBatch) -> None:
        if self.is_full:
            raise DimensionError(f"rollout buffer already holds {self.capacity} batches")
        if self._batches and len(batch) != len(self._batches[0]):
            raise DimensionError(
                f"batch of {len(batch)} agents does not match {len(self._batches[0])}"
            )
        self._batches.append(batch)

    def clear(self) -> None:
        self._batches.clear()

    @property
    def batches(self) -> tuple[TransitionBatch, ...]:
        """Stored batches, oldest first."""
        return tuple(self._batches)

    def stacked(self) -> TransitionBatch:
        """All stored transitions as (M, B) arrays wrapped in one batch (flattened row-major)."""
        if not self._batches:
            raise RolloutNotFullError("rollout buffer is empty")
        return TransitionBatch(
            *(
                np.concatenate([getattr(b, f) for b in self._batches])
                for f in ("states", "actions", "rewards", "next_states", "log_probs")
            )
        )

    @property
    def agents(self) -> int:
        return len(self._batches[0]) if self._batches else 0


def gae(
    rollout: RolloutBuffer, critic: MlpNet, gamma: float, lam: float
) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimates and returns over a full rollout.

    ``delta_m = r_m + gamma*V(X_{m+1}) - V(X_m)``,
    ``A_m = delta_m + gamma*lam*A_{m+1}`` with ``A_M = 0`` and
    ``R_m = A_m + V(X_m)``, independently per agent.

    Returns:
        (advantages, returns), each of shape (M, B)

    Raises:
        RolloutNotFullError: If the buffer holds fewer than M batches
    """
    if not rollout.is_full:
        raise RolloutNotFullError(
            f"GAE needs a full rollout ({len(rollout)}/{rollout.capacity} batches stored)"
        )
    m, b = rollout.capacity, rollout.agents
    flat = rollout.stacked()
    values = critic.scalar(flat.states).reshape(m, b)
    next_values = critic.scalar(flat.next_states).reshape(m, b)
    deltas = flat.rewards.reshape(m, b) + gamma * next_values - values

    advantages = np.empty_like(deltas)
    running = np.zeros(b)
    for t in range(m - 1, -1, -1):
        running = deltas[t] + gamma * lam * running
        advantages[t] = running
    return advantages, advantages + values


def reinforce_actor_loss(
    policy: GaussianPolicy, states: np.ndarray, actions: np.ndarray, weights: np.ndarray
) -> tuple[float, np.ndarray]:
    """Policy-gradient loss ``mean(-w * log pi(a | x))`` with constant weights.

    The weights are TD errors (actor-critic) or advantages (ablated PPO).
    """
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    logp = policy.log_prob(states, actions)
    n = w.shape[0]
    loss = float(np.mean(-w * logp))
    if not np.isfinite(loss):
        raise NonFiniteError("actor loss is not finite", where="actor loss")
    return loss, policy.log_prob_grad(states, actions, -w / n)


def ppo_actor_loss(
    policy: GaussianPolicy,
    states: np.ndarray,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    clip_eps: float,
    entropy_coef: float,
) -> tuple[float, np.ndarray]:
    """Clipped surrogate loss with entropy bonus, and its parameter gradient.

    ``-mean(min(r*A, clip(r, 1-eps, 1+eps)*A)) - c_ent*mean(H)`` with
    ``r = exp(log pi - log pi_old)``.

    Raises:
        NonFiniteError: If a probability ratio is not finite
    """
    adv = np.asarray(advantages, dtype=np.float64).reshape(-1)
    logp = policy.log_prob(states, actions)
    ratio = np.exp(logp - np.asarray(old_log_probs, dtype=np.float64).reshape(-1))
    if not np.all(np.isfinite(ratio)):
        raise NonFiniteError("non-finite probability ratio", where="ppo ratio")

    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv
    entropy = policy.entropy(states)
    n = adv.shape[0]
    loss = float(-np.mean(np.minimum(unclipped, clipped)) - entropy_coef * np.mean(entropy))

    # gradient flows through the unclipped branch only where min() selects it
    active = unclipped <= clipped
    d_logp = np.where(active, -adv * ratio / n, 0.0)
    grad = policy.log_prob_grad(states, actions, d_logp)
    if entropy_coef != 0.0:
        grad = grad + policy.entropy_grad(states, np.full(n, -entropy_coef / n))
    return loss, grad
