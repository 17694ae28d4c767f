"""Linear-quadratic mean field control game benchmark.

This module provides the environment the agents interact with (Euler-Maruyama
dynamics, running cost, reward, discount) and the closed-form equilibrium used
as an oracle for every learned object.

The cost depends on the global law only through its mean ``m_global`` and on
the local law only through ``m_local``, so all functions take means.
"""

from __future__ import annotations

import math
from typing import Protocol

import numpy as np

from mfcgac.exceptions import OracleUndefinedError
from mfcgac.models import AnalyticalSolution, LqParams

ArrayLike = np.ndarray | float


def running_cost(
    x: ArrayLike, m_global: float, m_local: float, a: ArrayLike, p: LqParams
) -> ArrayLike:
    """Running cost f(x, mu, mu_local, a) of the LQ benchmark (a sum of squares).

    Example:
        >>> running_cost(0.0, 0.0, 0.0, 1.0, LqParams())
        0.53125
    """
    return (
        0.5 * np.square(a)
        + p.c1 * np.square(x - p.c2 * m_global)
        + p.c3 * np.square(x - p.c4)
        + p.ct1 * np.square(x - p.ct2 * m_local)
        + p.ct5 * m_local**2
    )


def reward(
    x: ArrayLike, m_global: float, m_local: float, a: ArrayLike, p: LqParams
) -> ArrayLike:
    """Reward ``-f * dt``."""
    return -running_cost(x, m_global, m_local, a, p) * p.dt


def env_step(x: ArrayLike, a: ArrayLike, p: LqParams, z: ArrayLike) -> ArrayLike:
    """One Euler-Maruyama step ``x + a*dt + sigma*sqrt(dt)*z``.

    Works element-wise on arrays; ``z`` carries one standard-normal draw per element.
    """
    return x + a * p.dt + p.sigma * math.sqrt(p.dt) * z


def discount_factor(p: LqParams) -> float:
    """Per-step discount ``exp(-beta*dt)``."""
    return math.exp(-p.beta * p.dt)


def sample_initial(n: int, rng: np.random.Generator, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    """Draw ``n`` initial states from the initial law N(mean, std^2)."""
    return mean + std * rng.standard_normal(n)


def analytical_solution(p: LqParams) -> AnalyticalSolution:
    """Closed-form value coefficients, equilibrium mean and limiting law.

    Raises:
        OracleUndefinedError: If D = 0, the discriminant is negative, or
            Gamma_2 is not strictly positive

    Example:
        >>> sol = analytical_solution(LqParams())
        >>> round(sol.mean, 7)
        0.2409639
    """
    denom = p.denominator
    if denom == 0.0:
        raise OracleUndefinedError("denominator D vanishes; the equilibrium mean is undefined")
    quad = p.c1 + p.c3 + p.ct1
    disc = p.beta**2 + 8.0 * quad
    if disc < 0.0:
        raise OracleUndefinedError(f"beta^2 + 8(c1+c3+ct1) = {disc} is negative")
    gamma2 = (-p.beta + math.sqrt(disc)) / 4.0
    if gamma2 <= 0.0:
        raise OracleUndefinedError(f"Gamma_2 = {gamma2} is not positive")

    mean = p.c3 * p.c4 / denom
    gamma1 = -2.0 * gamma2 * p.c3 * p.c4 / denom
    gamma0 = (
        p.c1 * p.c2**2 * mean**2
        + (p.ct1 * p.ct2**2 + p.ct5) * mean**2
        + p.sigma**2 * gamma2
        - 0.5 * gamma1**2
        + p.c3 * p.c4**2
    ) / p.beta
    return AnalyticalSolution(
        gamma2=gamma2,
        gamma1=gamma1,
        gamma0=gamma0,
        mean=mean,
        limit_mean=-gamma1 / (2.0 * gamma2),
        limit_variance=p.sigma**2 / (4.0 * gamma2),
    )


def optimal_control(x: ArrayLike, sol: AnalyticalSolution) -> ArrayLike:
    """Equilibrium feedback control ``-(2*Gamma_2*x + Gamma_1)``."""
    return -(2.0 * sol.gamma2 * x + sol.gamma1)


def value_function(x: ArrayLike, sol: AnalyticalSolution) -> ArrayLike:
    """Equilibrium value ``Gamma_2*x^2 + Gamma_1*x + Gamma_0``."""
    return sol.gamma2 * np.square(x) + sol.gamma1 * x + sol.gamma0


def hjb_residual(x: ArrayLike, sol: AnalyticalSolution, p: LqParams) -> ArrayLike:
    """Residual of the stationary HJB equation at the closed-form solution.

    ``beta*v - [g + l - 0.5*v'^2 + sigma^2*Gamma_2]`` where ``g`` is the running
    cost at a = 0 with both means at ``sol.mean`` and
    ``l(x) = 2m(ct5 - ct1*ct2*(1 - ct2))*x`` is the measure derivative of the
    local (control) cost. It vanishes identically for a correct oracle.
    """
    m = sol.mean
    g = running_cost(x, m, m, 0.0, p)
    local = 2.0 * m * (p.ct5 - p.ct1 * p.ct2 * (1.0 - p.ct2)) * x
    v_prime = 2.0 * sol.gamma2 * x + sol.gamma1
    rhs = g + local - 0.5 * np.square(v_prime) + p.sigma**2 * sol.gamma2
    return p.beta * value_function(x, sol) - rhs


class MeanFieldEnvironment(Protocol):
    """What a training loop needs from an environment."""

    def cost(self, x: np.ndarray, m_global: float, m_local: float, a: np.ndarray) -> np.ndarray: ...

    def reward(self, x: np.ndarray, m_global: float, m_local: float, a: np.ndarray) -> np.ndarray: ...

    def step(self, x: np.ndarray, a: np.ndarray, z: np.ndarray) -> np.ndarray: ...

    @property
    def discount(self) -> float: ...

    def sample_initial(self, n: int, rng: np.random.Generator) -> np.ndarray: ...


class LqEnvironment:
    """Vectorized LQ environment.

    Args:
        params: Benchmark coefficients
        init_mean: Mean of the initial law
        init_std: Standard deviation of the initial law

    Example:
        >>> env = LqEnvironment(LqParams(sigma=0.0))
        >>> env.step(np.array([1.0]), np.array([2.0]), np.zeros(1))
        array([1.02])
    """

    def __init__(self, params: LqParams, *, init_mean: float = 0.0, init_std: float = 1.0) -> None:
        """Initialize the environment."""
        self.params = params
        self.init_mean = init_mean
        self.init_std = init_std

    def cost(self, x: np.ndarray, m_global: float, m_local: float, a: np.ndarray) -> np.ndarray:
        return np.asarray(running_cost(x, m_global, m_local, a, self.params))

    def reward(self, x: np.ndarray, m_global: float, m_local: float, a: np.ndarray) -> np.ndarray:
        return np.asarray(reward(x, m_global, m_local, a, self.params))

    def step(self, x: np.ndarray, a: np.ndarray, z: np.ndarray) -> np.ndarray:
        return np.asarray(env_step(x, a, self.params, z))

    @property
    def discount(self) -> float:
        return discount_factor(self.params)

    def sample_initial(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_initial(n, rng, self.init_mean, self.init_std)
