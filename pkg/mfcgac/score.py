"""Score matching and Langevin sampling of mean-field distributions.

A score network approximates the gradient of the log-density of a population
law. It is fitted with the implicit score-matching objective
``tr(d S / d x) + 0.5*|S|^2`` (exact trace or Hutchinson's estimator), and
samples of the law are produced by unadjusted Langevin dynamics
``x <- x + (eps/2)*S(x) + sqrt(eps)*z``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mfcgac._autodiff import MlpNet
from mfcgac.exceptions import DimensionError, DivergenceError, NonFiniteError, RunIOError
from mfcgac.models import LangevinConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Particle approximation ``(1/k) sum_i delta_{x_i}`` of a one-dimensional law."""

    particles: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.particles, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] == 0:
            raise DimensionError(f"expected a non-empty 1-D particle array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("non-finite particle position", where="empirical measure")
        object.__setattr__(self, "particles", arr)

    @property
    def size(self) -> int:
        return int(self.particles.shape[0])

    @property
    def mean(self) -> float:
        return measure_mean(self)

    @property
    def variance(self) -> float:
        return measure_variance(self)


def measure_mean(meas: EmpiricalMeasure) -> float:
    """Arithmetic mean of the particles."""
    return float(np.mean(meas.particles))


def measure_variance(meas: EmpiricalMeasure) -> float:
    """Unbiased sample variance; 0 for a single particle."""
    if meas.size < 2:
        return 0.0
    return float(np.var(meas.particles, ddof=1))


def _score_objective(
    net: MlpNet, states: np.ndarray, probes: np.ndarray | None
) -> tuple[float, np.ndarray]:
    x = np.asarray(states, dtype=np.float64)
    if x.size == 0:
        raise DimensionError("score loss needs a non-empty batch")
    values = net.forward(x)
    trace, _, grad = net.divergence_backward(x, probes, upstream=values)
    n = values.shape[0]
    loss = float(np.mean(trace + 0.5 * np.sum(values * values, axis=1)))
    if not np.isfinite(loss):
        raise NonFiniteError("score loss is not finite", where="score loss")
    return loss, grad / n


def score_loss_exact(net: MlpNet, states: np.ndarray) -> tuple[float, np.ndarray]:
    """Batch-mean score-matching loss with the exact trace, and its parameter gradient.

    Returns:
        (loss, gradient flat like ``net.params``)
    """
    return _score_objective(net, states, None)


def score_loss_hutchinson(
    net: MlpNet, states: np.ndarray, z: np.ndarray
) -> tuple[float, np.ndarray]:
    """Score-matching loss with Hutchinson's trace estimator ``z^T (dS/dx) z``.

    One probe per state; the same probes enter the loss and its gradient.
    """
    x = np.asarray(states, dtype=np.float64)
    probes = np.asarray(z, dtype=np.float64)
    if probes.shape[0] != np.atleast_1d(x).shape[0]:
        raise DimensionError(f"need one probe per state, got {probes.shape[0]} for {x.shape[0]}")
    return _score_objective(net, x, probes)


def langevin_sample(
    net: MlpNet,
    cfg: LangevinConfig,
    init: EmpiricalMeasure,
    rng: np.random.Generator,
) -> EmpiricalMeasure:
    """Run ``cfg.iterations`` unadjusted Langevin steps on every particle.

    Raises:
        DivergenceError: If any particle leaves ``[-bound, bound]``
    """
    x = init.particles.copy()
    if cfg.step_size == 0.0 or cfg.iterations == 0:
        return EmpiricalMeasure(x)
    half = 0.5 * cfg.step_size
    root = np.sqrt(cfg.step_size)
    for it in range(cfg.iterations):
        x = x + half * net.scalar(x) + root * rng.standard_normal(x.shape[0])
        if not np.all(np.abs(x) <= cfg.divergence_bound):
            raise DivergenceError(
                f"Langevin particle escaped |x| <= {cfg.divergence_bound:g} at iteration {it}",
                where="langevin",
            )
    return EmpiricalMeasure(x)


class MeanFieldSampler:
    """Persistent particle set representing one mean-field law.

    Each refresh runs Langevin dynamics from the previous particles
    (warm start) or from the initial particles (cold start).

    Args:
        cfg: Langevin settings
        initial: Particles drawn from the initial law

    Attributes:
        measure: Current particle set
        refreshes: Number of refreshes performed
    """

    def __init__(self, cfg: LangevinConfig, initial: EmpiricalMeasure) -> None:
        """Initialize the sampler."""
        self.cfg = cfg
        self._initial = initial
        self.measure = initial
        self.refreshes = 0

    def refresh(self, net: MlpNet, rng: np.random.Generator) -> EmpiricalMeasure:
        start = self.measure if self.cfg.warm_start else self._initial
        self.measure = langevin_sample(net, self.cfg, start, rng)
        self.refreshes += 1
        return self.measure


def write_particles_csv(meas: EmpiricalMeasure, path: Path) -> None:
    """Write particles as a single-column CSV with header ``x``."""
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x"])
            writer.writerows([format(v, ".17g")] for v in meas.particles.tolist())
    except OSError as e:
        raise RunIOError(f"cannot write particles to {path}: {e}", path=path) from e


def read_particles_csv(path: Path) -> EmpiricalMeasure:
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise RunIOError(f"cannot read particles from {path}: {e}", path=path) from e
    if not rows or rows[0] != ["x"]:
        raise RunIOError(f"{path} is not a particle CSV (missing 'x' header)", path=path)
    return EmpiricalMeasure(np.array([float(r[0]) for r in rows[1:]], dtype=np.float64))
