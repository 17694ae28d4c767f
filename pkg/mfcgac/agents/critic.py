"""Value network, its target copy and the temporal-difference losses."""

from __future__ import annotations

import numpy as np

from mfcgac._autodiff import MlpNet
from mfcgac.exceptions import DimensionError, NonFiniteError


class CriticPair:
    """Critic ``V`` and the target network ``T`` used inside TD targets.

    Args:
        width: Hidden width of both networks
        period: Sync ``T <- V`` whenever ``step % period == 0``
        rng: Generator for Glorot initialization of the critic
        critic: Existing critic to wrap (its copy becomes the target)

    Example:
        >>> pair = CriticPair(rng=np.random.default_rng(0))
        >>> pair.sync(200)
        True
        >>> np.array_equal(pair.critic.params, pair.target.params)
        True
    """

    def __init__(
        self,
        width: int = 128,
        period: int = 200,
        *,
        rng: np.random.Generator | None = None,
        critic: MlpNet | None = None,
    ) -> None:
        """Initialize the critic and its target."""
        self.critic = critic if critic is not None else MlpNet([1, width, 1], rng=rng)
        self.target = self.critic.copy()
        self.period = period
        self.syncs = 0

    def sync(self, step: int) -> bool:
        """Copy critic parameters into the target on sync steps; returns whether it did."""
        if step % self.period != 0:
            return False
        self.target.load_params(self.critic.params)
        self.syncs += 1
        return True


def target_sync(pair: CriticPair, step: int) -> CriticPair:
    pair.sync(step)
    return pair


def td_target(
    r: np.ndarray, x_next: np.ndarray, target_net: MlpNet, gamma: float
) -> np.ndarray:
    """``y = r + gamma * T(x_next)``; no gradient flows through it."""
    return np.asarray(r, dtype=np.float64) + gamma * target_net.scalar(x_next)


def td_error(y: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.asarray(y, dtype=np.float64) - np.asarray(v, dtype=np.float64)


def value_loss(
    net: MlpNet, states: np.ndarray, targets: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean squared regression of ``V(states)`` onto fixed targets.

    Returns:
        (loss, parameter gradient, residuals ``targets - V(states)``)

    Raises:
        DimensionError: If states and targets differ in length
        NonFiniteError: If the loss is not finite
    """
    x = np.asarray(states, dtype=np.float64).reshape(-1)
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    if x.shape != y.shape or x.size == 0:
        raise DimensionError(f"states {x.shape} and targets {y.shape} must be equal and non-empty")
    delta = td_error(y, net.scalar(x))
    n = x.shape[0]
    loss = float(np.mean(delta * delta))
    if not np.isfinite(loss):
        raise NonFiniteError("critic loss is not finite", where="critic loss")
    grad = net.param_grad(x, -2.0 * delta / n)
    return loss, grad, delta


def critic_loss(
    net: MlpNet,
    states: np.ndarray,
    rewards: np.ndarray,
    next_states: np.ndarray,
    target_net: MlpNet,
    gamma: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """TD loss ``mean(delta^2)`` with ``delta = r + gamma*T(x') - V(x)``.

    Returns:
        (loss, parameter gradient of the critic, TD errors delta)
    """
    y = td_target(rewards, next_states, target_net, gamma)
    return value_loss(net, states, y)
