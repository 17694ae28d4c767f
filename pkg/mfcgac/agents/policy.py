"""Gaussian policies over a scalar action.

The trainable policy is a shared tanh trunk feeding two heads: one for the
action mean and one, through a floored softplus, for the standard deviation.
The three networks are views into a single flat parameter vector so one Adam
state drives the whole actor.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Protocol

import numpy as np

from mfcgac._autodiff import AdamState, MlpNet, _check_finite
from mfcgac.exceptions import DimensionError
from mfcgac.lq import optimal_control
from mfcgac.models import AnalyticalSolution, HeadMap, OutputActivation, PolicyCheckpoint

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def gaussian_log_prob(mean: np.ndarray, std: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Log-density of N(mean, std^2) at ``a``.

    Example:
        >>> round(float(gaussian_log_prob(np.array(0.0), np.array(2.0), np.array(2.0))), 7)
        -2.1120857
    """
    u = (a - mean) / std
    return -0.5 * u * u - np.log(std) - LOG_SQRT_2PI


def gaussian_entropy(std: np.ndarray) -> np.ndarray:
    """Differential entropy ``0.5*ln(2*pi*e*std^2)``."""
    return 0.5 * np.log(2.0 * math.pi * math.e * np.square(std))


class Policy(Protocol):
    """What training and evaluation need from a policy."""

    def distribution(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...

    def mean(self, x: np.ndarray) -> np.ndarray: ...

    def sample(
        self, x: np.ndarray, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]: ...

    def log_prob(self, x: np.ndarray, a: np.ndarray) -> np.ndarray: ...

    def entropy(self, x: np.ndarray) -> np.ndarray: ...


class _GaussianMixin(ABC):
    @abstractmethod
    def distribution(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean and standard deviation per state, each of shape (n,)."""

    def mean(self, x: np.ndarray) -> np.ndarray:
        return self.distribution(x)[0]

    def sample(
        self, x: np.ndarray, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``a = mean + std*z`` per state; returns (actions, log-probabilities)."""
        mean, std = self.distribution(x)
        a = mean + std * rng.standard_normal(mean.shape[0])
        return a, gaussian_log_prob(mean, std, a)

    def log_prob(self, x: np.ndarray, a: np.ndarray) -> np.ndarray:
        mean, std = self.distribution(x)
        return gaussian_log_prob(mean, std, np.asarray(a, dtype=np.float64))

    def entropy(self, x: np.ndarray) -> np.ndarray:
        return gaussian_entropy(self.distribution(x)[1])


class GaussianPolicy(_GaussianMixin):
    """Trainable Gaussian actor.

    Args:
        width: Width of the trunk and of each head's hidden layer
        rng: Generator for Glorot initialization of all three networks
        params: Existing flat parameter vector to adopt

    Attributes:
        params: Flat parameters laid out as trunk, mean head, std head
        trunk: ``[1, width]`` network with tanh output
        mean_head: ``[width, width, 1]`` network
        std_head: ``[width, width, 1]`` network with floored softplus

    Example:
        >>> policy = GaussianPolicy(rng=np.random.default_rng(0))
        >>> a, logp = policy.sample(np.zeros(4), np.random.default_rng(1))
        >>> a.shape
        (4,)
    """

    def __init__(
        self,
        width: int = 64,
        *,
        rng: np.random.Generator | None = None,
        params: np.ndarray | None = None,
    ) -> None:
        """Initialize the policy."""
        self.width = width
        specs: list[tuple[list[int], OutputActivation, HeadMap]] = [
            ([1, width], "tanh", "identity"),
            ([width, width, 1], "identity", "identity"),
            ([width, width, 1], "identity", "softplus"),
        ]
        counts = [MlpNet.param_count(sizes) for sizes, _, _ in specs]
        total = sum(counts)
        if params is None:
            params = np.zeros(total, dtype=np.float64)
            if rng is not None:
                params = np.concatenate(
                    [MlpNet(s, output_activation=act, head=hd, rng=rng).params for s, act, hd in specs]
                )
        elif params.shape != (total,):
            raise DimensionError(f"expected {total} policy parameters, got {params.shape}")
        self.params = np.ascontiguousarray(params, dtype=np.float64)

        nets = []
        offset = 0
        for (sizes, act, hd), count in zip(specs, counts, strict=True):
            view = self.params[offset : offset + count]
            nets.append(MlpNet(sizes, output_activation=act, head=hd, params=view))
            offset += count
        self.trunk, self.mean_head, self.std_head = nets

    def distribution(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean and standard deviation per state, each of shape (n,)."""
        h = self.trunk.forward(x)
        return self.mean_head.scalar(h), self.std_head.scalar(h)

    def backward(self, x: np.ndarray, d_mean: np.ndarray, d_std: np.ndarray) -> np.ndarray:
        """Parameter gradient of ``sum_n d_mean_n*mean(x_n) + d_std_n*std(x_n)``."""
        h = self.trunk.forward(x)
        g_mean, h_mean = self.mean_head.backward(h, d_mean)
        g_std, h_std = self.std_head.backward(h, d_std)
        g_trunk, _ = self.trunk.backward(x, h_mean + h_std)
        return np.concatenate([g_trunk, g_mean, g_std])

    def log_prob_grad(self, x: np.ndarray, a: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """Parameter gradient of ``sum_n upstream_n * log pi(a_n | x_n)``.

        Uses ``d logpi/d mean = (a - mean)/std^2`` and
        ``d logpi/d std = (a - mean)^2/std^3 - 1/std``.
        """
        mean, std = self.distribution(x)
        diff = np.asarray(a, dtype=np.float64) - mean
        d_mean = upstream * diff / std**2
        d_std = upstream * (diff**2 / std**3 - 1.0 / std)
        return self.backward(x, d_mean, d_std)

    def entropy_grad(self, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """Parameter gradient of ``sum_n upstream_n * H(pi(. | x_n))``."""
        _, std = self.distribution(x)
        return self.backward(x, np.zeros_like(std), upstream / std)

    def load_params(self, values: np.ndarray) -> None:
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != self.params.shape:
            raise DimensionError(f"expected {self.params.shape[0]} parameters, got {arr.shape}")
        _check_finite(arr, "loaded policy parameters")
        self.params[...] = arr

    def snapshot(self) -> np.ndarray:
        return self.params.copy()

    def to_checkpoint(self, optimizer: AdamState | None = None) -> PolicyCheckpoint:
        return PolicyCheckpoint(
            trunk=self.trunk.architecture(),
            mean_head=self.mean_head.architecture(),
            std_head=self.std_head.architecture(),
            params=self.params.tolist(),
            optimizer=optimizer.to_checkpoint() if optimizer is not None else None,
        )

    @classmethod
    def from_checkpoint(cls, ckpt: PolicyCheckpoint) -> tuple[GaussianPolicy, AdamState | None]:
        policy = cls(ckpt.trunk.sizes[-1], params=np.asarray(ckpt.params, dtype=np.float64))
        opt = AdamState.from_checkpoint(ckpt.optimizer) if ckpt.optimizer is not None else None
        return policy, opt


class OraclePolicy(_GaussianMixin):
    """Frozen Gaussian policy centred on the equilibrium control.

    Args:
        solution: Closed-form equilibrium supplying the control
        std: Fixed standard deviation of the actions
    """

    def __init__(self, solution: AnalyticalSolution, std: float = 0.05) -> None:
        """Initialize the oracle policy."""
        self.solution = solution
        self.std = std
        self.params = np.zeros(0)

    def distribution(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xs = np.asarray(x, dtype=np.float64).reshape(-1)
        mean = np.asarray(optimal_control(xs, self.solution), dtype=np.float64)
        return mean, np.full_like(mean, self.std)


def policy_sample(
    policy: Policy, x: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    return policy.sample(x, rng)


def policy_logprob(policy: Policy, x: np.ndarray, a: np.ndarray) -> np.ndarray:
    return policy.log_prob(x, a)


def policy_entropy(policy: Policy, x: np.ndarray) -> np.ndarray:
    return policy.entropy(x)
