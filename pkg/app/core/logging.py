"""Logging configuration.

Only run metadata is logged (command, mode, shapes, durations). Series values
and money figures from input files stay out of the log stream.
"""

import logging
import sys

from app.core.config import settings


def setup_logging(level: str | None = None) -> logging.Logger:
    """Configure and return the toolkit logger.

    Args:
        level: Level name; defaults to ``settings.log_level`` (``TWINSIGHT_LOG``).
    """
    logger = logging.getLogger("twinsight")
    resolved = logging.getLevelName((level or settings.log_level).upper())
    if not isinstance(resolved, int):
        resolved = logging.WARNING

    if not logger.handlers:
        # stderr: stdout is reserved for command output
        handler = logging.StreamHandler(sys.stderr)

        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    logger.setLevel(resolved)
    for handler in logger.handlers:
        handler.setLevel(resolved)

    return logger


def log_run(
    logger: logging.Logger,
    command: str,
    mode: str,
    periods: int,
    processes: int,
    duration_ms: float,
    status: str = "ok",
) -> None:
    """Log command metadata without exposing series content.

    Args:
        logger: Logger instance
        command: CLI subcommand (run, compare, synth, validate)
        mode: Mode label of the evaluated regime
        periods: Number of periods processed
        processes: Number of process series
        duration_ms: Wall time in milliseconds
        status: Outcome keyword
    """
    logger.info(
        "command: name=%s mode=%s periods=%d processes=%d duration_ms=%.2f status=%s",
        command,
        mode,
        periods,
        processes,
        duration_ms,
        status,
    )


# Global logger instance
logger = setup_logging()
