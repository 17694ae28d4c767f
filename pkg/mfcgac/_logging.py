"""Console logging for the command-line interface.

Library modules only create loggers; handlers are installed here, by the CLI.
"""

from __future__ import annotations

import logging

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "mfcgac"


def configure_logging(level: int = logging.INFO, console: Console | None = None) -> logging.Logger:
    """Attach a single RichHandler to the package logger.

    Calling it again replaces the handler, so repeated CLI invocations in one
    process do not duplicate output.
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=False,
        log_time_format="[%X]",
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger
