"""Dense networks with exact first and mixed second-order derivatives.

This module handles:
- Forward evaluation of small tanh MLPs on batches of inputs
- Reverse-mode parameter gradients (and input gradients, for chaining nets)
- Forward-mode input Jacobians
- Parameter gradients of the divergence / Hutchinson quadratic form
- Adam with bias correction on flat parameter vectors

Parameters of a network live in one flat float64 array laid out layer by layer
as ``W_0 (in*out, row-major), b_0, W_1, b_1, ...``. Layer weights are views into
that array, so optimizers update the network in place.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from mfcgac.exceptions import ConfigError, DimensionError, NonFiniteError
from mfcgac.models import AdamCheckpoint, HeadMap, NetArchitecture, NetCheckpoint, OutputActivation

STD_FLOOR = 1e-4


def _activate(kind: str, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the activation and its first and second derivatives at ``u``."""
    if kind == "tanh":
        h = np.tanh(u)
        d1 = 1.0 - h * h
        return h, d1, -2.0 * h * d1
    if kind == "identity":
        return u, np.ones_like(u), np.zeros_like(u)
    # softplus floored at STD_FLOOR; the floor is flat, so both derivatives vanish there
    soft = np.logaddexp(0.0, u)
    sig = 0.5 * (1.0 + np.tanh(0.5 * u))
    live = soft > STD_FLOOR
    h = np.where(live, soft, STD_FLOOR)
    d1 = np.where(live, sig, 0.0)
    return h, d1, np.where(live, sig * (1.0 - sig), 0.0)


def _check_finite(values: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"non-finite values in {where}", where=where)


class MlpNet:
    """Feed-forward network with tanh hidden layers.

    Args:
        sizes: Layer widths ``(d, hidden..., out)``
        output_activation: Activation of the last layer ("identity" or "tanh")
        head: Map applied to a scalar output ("identity" or "softplus", the
            latter floored at 1e-4 to keep standard deviations positive)
        params: Flat parameter array to use in place (e.g. a slice of a larger
            vector). Zeros when omitted and no ``rng`` is given.
        rng: Generator for Glorot-uniform weight initialization (biases zero)

    Example:
        >>> net = MlpNet([1, 128, 1], rng=np.random.default_rng(0))
        >>> net.forward(np.array([0.0, 1.0])).shape
        (2, 1)
    """

    def __init__(
        self,
        sizes: Sequence[int],
        *,
        output_activation: OutputActivation = "identity",
        head: HeadMap = "identity",
        params: np.ndarray | None = None,
        rng: np.random.Generator | None = None,
    ) -> None:
        """Initialize the network."""
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ConfigError(f"invalid layer sizes {list(sizes)}")
        if head != "identity" and (sizes[-1] != 1 or output_activation != "identity"):
            raise ConfigError("a head map needs a scalar output with identity activation")

        self.sizes = tuple(int(s) for s in sizes)
        self.output_activation: OutputActivation = output_activation
        self.head: HeadMap = head
        self._shapes = [(self.sizes[i], self.sizes[i + 1]) for i in range(len(self.sizes) - 1)]
        last = "softplus" if head == "softplus" else output_activation
        self._kinds = ["tanh"] * (len(self._shapes) - 1) + [last]

        count = self.param_count(self.sizes)
        if params is None:
            params = np.zeros(count, dtype=np.float64)
            if rng is not None:
                self._glorot(params, rng)
        elif params.shape != (count,) or params.dtype != np.float64:
            raise DimensionError(
                f"expected a float64 parameter array of length {count}, got "
                f"{params.dtype} {params.shape}"
            )
        self.params = params
        self._bind()

    @staticmethod
    def param_count(sizes: Sequence[int]) -> int:
        """Sum over layers of (in + 1) * out."""
        return sum((sizes[i] + 1) * sizes[i + 1] for i in range(len(sizes) - 1))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def _bind(self) -> None:
        self._layers: list[tuple[np.ndarray, np.ndarray]] = []
        offset = 0
        for n_in, n_out in self._shapes:
            w = self.params[offset : offset + n_in * n_out].reshape(n_in, n_out)
            offset += n_in * n_out
            b = self.params[offset : offset + n_out]
            offset += n_out
            self._layers.append((w, b))

    def _glorot(self, params: np.ndarray, rng: np.random.Generator) -> None:
        offset = 0
        for n_in, n_out in self._shapes:
            bound = np.sqrt(6.0 / (n_in + n_out))
            params[offset : offset + n_in * n_out] = rng.uniform(-bound, bound, n_in * n_out)
            offset += (n_in + 1) * n_out

    # ------------------------------------------------------------------ shapes

    def _as_batch(self, x: np.ndarray | float) -> np.ndarray:
        """Coerce input to shape (n, d).

        A 1-D array is a batch of scalars when d == 1 and a single sample otherwise.
        """
        arr = np.asarray(x, dtype=np.float64)
        d = self.in_dim
        if arr.ndim == 0:
            if d != 1:
                raise DimensionError(f"scalar input given to a net with input dim {d}")
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            if d == 1:
                arr = arr.reshape(-1, 1)
            elif arr.shape[0] == d:
                arr = arr.reshape(1, d)
            else:
                raise DimensionError(f"expected input of length {d}, got {arr.shape[0]}")
        elif arr.ndim != 2 or arr.shape[1] != d:
            raise DimensionError(f"expected input of shape (n, {d}), got {arr.shape}")
        _check_finite(arr, "network input")
        return arr

    def _as_upstream(self, upstream: np.ndarray | float, n: int) -> np.ndarray:
        arr = np.asarray(upstream, dtype=np.float64)
        if arr.ndim <= 1 and self.out_dim == 1:
            if arr.size not in (1, n):
                raise DimensionError(f"expected upstream of length 1 or {n}, got {arr.size}")
            arr = np.broadcast_to(arr.reshape(-1, 1), (n, 1))
        if arr.shape != (n, self.out_dim):
            raise DimensionError(f"expected upstream of shape ({n}, {self.out_dim}), got {arr.shape}")
        _check_finite(arr, "upstream gradient")
        return arr

    # ------------------------------------------------------------------ evaluation

    def _forward(self, x: np.ndarray) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]]]:
        cache: list[tuple[np.ndarray, np.ndarray]] = []
        h = x
        for (w, b), kind in zip(self._layers, self._kinds, strict=True):
            out, d1, _ = _activate(kind, h @ w + b)
            cache.append((h, d1))
            h = out
        return h, cache

    def forward(self, x: np.ndarray | float) -> np.ndarray:
        """Evaluate the network; returns an array of shape (n, out)."""
        out, _ = self._forward(self._as_batch(x))
        return out

    def scalar(self, x: np.ndarray | float) -> np.ndarray:
        """Evaluate a scalar-output network; returns shape (n,)."""
        if self.out_dim != 1:
            raise DimensionError(f"scalar() needs out dim 1, net has {self.out_dim}")
        return self.forward(x)[:, 0]

    def backward(
        self, x: np.ndarray | float, upstream: np.ndarray | float
    ) -> tuple[np.ndarray, np.ndarray]:
        """Reverse-mode pass for the scalar ``sum_n upstream_n . f(x_n)``.

        Returns:
            (parameter gradient, flat like ``params``; input gradient, shape (n, d))
        """
        xb = self._as_batch(x)
        up = self._as_upstream(upstream, xb.shape[0])
        _, cache = self._forward(xb)
        grad = np.empty_like(self.params)
        offset = len(self.params)
        g = up
        for (w, _), (h_prev, d1), (n_in, n_out) in zip(
            reversed(self._layers), reversed(cache), reversed(self._shapes), strict=True
        ):
            du = g * d1
            offset -= n_out
            grad[offset : offset + n_out] = du.sum(axis=0)
            offset -= n_in * n_out
            grad[offset : offset + n_in * n_out] = (h_prev.T @ du).ravel()
            g = du @ w.T
        _check_finite(grad, "parameter gradient")
        return grad, g

    def param_grad(self, x: np.ndarray | float, upstream: np.ndarray | float) -> np.ndarray:
        """Gradient w.r.t. parameters of ``sum_n upstream_n . f(x_n)``."""
        return self.backward(x, upstream)[0]

    def input_derivative(self, x: np.ndarray | float) -> np.ndarray:
        """Exact Jacobian by forward-mode propagation; shape (n, d, out).

        ``J[n, i, j] = d f_j / d x_i`` at sample n. For d = out = 1 this is the
        scalar divergence used by the score-matching loss.
        """
        xb = self._as_batch(x)
        n, d = xb.shape
        jac = np.broadcast_to(np.eye(d), (n, d, d))
        h = xb
        for (w, b), kind in zip(self._layers, self._kinds, strict=True):
            out, d1, _ = _activate(kind, h @ w + b)
            jac = (jac @ w) * d1[:, None, :]
            h = out
        return np.ascontiguousarray(jac)

    def divergence_backward(
        self,
        x: np.ndarray | float,
        direction: np.ndarray | None = None,
        upstream: np.ndarray | float | None = None,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Divergence (or its Hutchinson form) together with its parameter gradient.

        With ``direction=None`` the per-sample quantity is the exact trace
        ``tr(d f / d x)``, accumulated over basis directions. With a direction
        ``z`` of shape (n, d) it is the quadratic form ``z^T (d f / d x) z``.
        When ``upstream`` is given, the gradient also includes
        ``sum_n upstream_n . f(x_n)`` so one call covers a full score-matching
        objective.

        Returns:
            (per-sample trace or quadratic form (n,); outputs (n, out);
            gradient of ``sum_n q_n [+ upstream . f]`` w.r.t. parameters)
        """
        xb = self._as_batch(x)
        n, d = xb.shape
        if self.out_dim != d:
            raise DimensionError(f"divergence needs out dim == in dim, got {self.sizes}")
        if direction is None:
            directions = [np.broadcast_to(np.eye(d)[i], (n, d)) for i in range(d)]
        else:
            z = np.asarray(direction, dtype=np.float64).reshape(n, d)
            _check_finite(z, "probe direction")
            directions = [z]

        trace = np.zeros(n)
        grad = np.zeros_like(self.params)
        outputs = np.empty((n, self.out_dim))
        for k, z in enumerate(directions):
            value_up = None
            if upstream is not None and k == 0:
                value_up = self._as_upstream(upstream, n)
            q, outputs, g = self._dual_backward(xb, z, value_up)
            trace += q
            grad += g
        _check_finite(grad, "divergence gradient")
        return trace, outputs, grad

    def _dual_backward(
        self, x: np.ndarray, z: np.ndarray, value_up: np.ndarray | None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # forward over (h, hdot) with hdot the tangent along z
        cache = []
        h, hdot = x, z
        for (w, b), kind in zip(self._layers, self._kinds, strict=True):
            udot = hdot @ w
            out, d1, d2 = _activate(kind, h @ w + b)
            cache.append((h, hdot, udot, d1, d2))
            h, hdot = out, d1 * udot
        q = np.sum(hdot * z, axis=1)

        grad = np.empty_like(self.params)
        offset = len(self.params)
        g_dot = z
        g = value_up if value_up is not None else np.zeros_like(h)
        for (w, _), (h_prev, hdot_prev, udot, d1, d2), (n_in, n_out) in zip(
            reversed(self._layers), reversed(cache), reversed(self._shapes), strict=True
        ):
            du_dot = g_dot * d1
            du = g * d1 + g_dot * d2 * udot
            offset -= n_out
            grad[offset : offset + n_out] = du.sum(axis=0)
            offset -= n_in * n_out
            grad[offset : offset + n_in * n_out] = (h_prev.T @ du + hdot_prev.T @ du_dot).ravel()
            g = du @ w.T
            g_dot = du_dot @ w.T
        return q, h, grad

    def param_grad_of_input_derivative(
        self, x: np.ndarray | float, direction: np.ndarray | None = None
    ) -> np.ndarray:
        """Gradient w.r.t. parameters of ``sum_n tr(d f / d x)(x_n)`` (or of ``z^T J z``)."""
        return self.divergence_backward(x, direction)[2]

    # ------------------------------------------------------------------ state

    def load_params(self, values: np.ndarray | Sequence[float]) -> None:
        """Overwrite parameters in place."""
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != self.params.shape:
            raise DimensionError(f"expected {self.params.shape[0]} parameters, got {arr.shape}")
        _check_finite(arr, "loaded parameters")
        self.params[...] = arr

    def snapshot(self) -> np.ndarray:
        return self.params.copy()

    def copy(self) -> MlpNet:
        return MlpNet(
            self.sizes,
            output_activation=self.output_activation,
            head=self.head,
            params=self.params.copy(),
        )

    def architecture(self) -> NetArchitecture:
        return NetArchitecture(
            sizes=list(self.sizes), output_activation=self.output_activation, head=self.head
        )

    def to_checkpoint(self, optimizer: AdamState | None = None) -> NetCheckpoint:
        return NetCheckpoint(
            architecture=self.architecture(),
            params=self.params.tolist(),
            optimizer=optimizer.to_checkpoint() if optimizer is not None else None,
        )

    @classmethod
    def from_architecture(
        cls, arch: NetArchitecture, params: np.ndarray | None = None
    ) -> MlpNet:
        return cls(
            arch.sizes, output_activation=arch.output_activation, head=arch.head, params=params
        )

    @classmethod
    def from_checkpoint(cls, ckpt: NetCheckpoint) -> tuple[MlpNet, AdamState | None]:
        """Rebuild a network (and its optimizer state, if saved)."""
        params = np.asarray(ckpt.params, dtype=np.float64)
        _check_finite(params, "checkpoint parameters")
        net = cls.from_architecture(ckpt.architecture, params)
        opt = AdamState.from_checkpoint(ckpt.optimizer) if ckpt.optimizer is not None else None
        return net, opt


@dataclass
class AdamState:
    """Adam moments for one flat parameter vector.

    Attributes:
        m: First-moment estimate
        v: Second-moment estimate
        t: Number of steps taken
    """

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(
        cls, n: int, *, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8
    ) -> AdamState:
        return cls(m=np.zeros(n), v=np.zeros(n), beta1=beta1, beta2=beta2, eps=eps)

    def step(self, params: np.ndarray, grads: np.ndarray, lr: float) -> None:
        """Apply one Adam update to ``params`` in place.

        An all-zero gradient leaves parameters and moments untouched (only the
        step counter advances). Nothing is modified when the gradient or the
        resulting parameters are non-finite.

        Raises:
            DimensionError: If lengths differ
            NonFiniteError: On non-finite gradients or updates
        """
        if params.shape != grads.shape or params.shape != self.m.shape:
            raise DimensionError(
                f"length mismatch: params {params.shape}, grads {grads.shape}, "
                f"moments {self.m.shape}"
            )
        if lr < 0.0:
            raise ConfigError(f"learning rate must be non-negative, got {lr}")
        _check_finite(grads, "optimizer gradient")
        t = self.t + 1
        if not np.any(grads):
            self.t = t
            return

        m = self.beta1 * self.m + (1.0 - self.beta1) * grads
        v = self.beta2 * self.v + (1.0 - self.beta2) * (grads * grads)
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        updated = params - (lr / bc1) * m / (np.sqrt(v / bc2) + self.eps)
        _check_finite(updated, "optimizer update")

        params[...] = updated
        self.m, self.v, self.t = m, v, t

    def to_checkpoint(self) -> AdamCheckpoint:
        return AdamCheckpoint(
            m=self.m.tolist(),
            v=self.v.tolist(),
            t=self.t,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
        )

    @classmethod
    def from_checkpoint(cls, ckpt: AdamCheckpoint) -> AdamState:
        return cls(
            m=np.asarray(ckpt.m, dtype=np.float64),
            v=np.asarray(ckpt.v, dtype=np.float64),
            t=ckpt.t,
            beta1=ckpt.beta1,
            beta2=ckpt.beta2,
            eps=ckpt.eps,
        )


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState, lr: float) -> np.ndarray:
    """Functional form of ``AdamState.step``; returns the (updated) params array."""
    state.step(params, grads, lr)
    return params
