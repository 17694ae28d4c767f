"""Exception classes for mfcgac.

All package exceptions inherit from MfcgError.
Numerical failures are separated from usage and I/O failures so the CLI can
map each family to its own exit code.
"""

from pathlib import Path
from typing import Any


class MfcgError(Exception):
    """Base exception for all mfcgac errors.

    All other exceptions inherit from this, allowing callers to catch
    every package error with a single except clause.

    Attributes:
        message: Error message
    """

    def __init__(self, message: str) -> None:
        """Initialize the exception."""
        super().__init__(message)
        self.message = message


class ConfigError(MfcgError):
    """Configuration is invalid.

    Raised when:
    - a JSON config has unknown keys or out-of-range values
    - the batch size is not divisible by the minibatch size
    - the LQ denominator D vanishes

    Attributes:
        errors: Field-level errors (pydantic's error list when available)

    Example:
        >>> try:
        ...     cfg = load_train_config(Path("config.json"))
        ... except ConfigError as e:
        ...     for err in e.errors:
        ...         print(err["loc"], err["msg"])
    """

    def __init__(self, message: str, errors: list[dict[str, Any]] | None = None) -> None:
        """Initialize the config error."""
        super().__init__(message)
        self.errors = errors or []


class DimensionError(MfcgError):
    """Input has the wrong shape for the network or buffer it was given to."""

    pass


class NonFiniteError(MfcgError):
    """A NaN or infinity appeared in an input, gradient, parameter or ratio.

    Attributes:
        where: Short label of the computation that produced it
    """

    def __init__(self, message: str, *, where: str | None = None) -> None:
        """Initialize the non-finite error."""
        super().__init__(message)
        self.where = where


class DivergenceError(NonFiniteError):
    """Numerical divergence during sampling or training.

    Raised when a Langevin particle escapes the divergence guard, or when a
    training run aborts because a loss, gradient or parameter went non-finite.

    Attributes:
        step: Training step at which the abort happened (None outside training)
        checkpoint: Path of the last checkpoint written before the abort
    """

    def __init__(
        self,
        message: str,
        *,
        where: str | None = None,
        step: int | None = None,
        checkpoint: Path | None = None,
    ) -> None:
        """Initialize the divergence error."""
        super().__init__(message, where=where)
        self.step = step
        self.checkpoint = checkpoint


class OracleUndefinedError(MfcgError):
    """The closed-form LQ solution does not exist for these coefficients.

    Raised when the denominator D is zero or the quadratic coefficient
    Gamma_2 is not strictly positive.
    """

    pass


class RolloutNotFullError(MfcgError):
    """Advantage estimation was requested on a rollout that is not yet full."""

    pass


class RunIOError(MfcgError):
    """A run directory could not be read or written.

    Attributes:
        path: File or directory involved
    """

    def __init__(self, message: str, *, path: Path | None = None) -> None:
        """Initialize the run I/O error."""
        super().__init__(message)
        self.path = path
