"""Shared CLI plumbing: option enums, manifest building and the error boundary."""

import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from app._compat import StrEnum
from typing import Any

import click
import typer
from pydantic import ValidationError
from typer.core import TyperGroup

from app.core.config import settings
from app.core.errors import TwinsightError, TwinValidationError, diagnostics_from_pydantic
from app.core.logging import log_run, logger
from app.core.metrics import COMMAND_DURATION_SECONDS, export_metrics
from app.models.schemas import ErrorResponse, RunManifest, WarmupPolicy


class WarmupOption(StrEnum):
    """Command-line spelling of the warm-up policy."""

    GROWING = "growing"
    SKIP = "skip"

    @property
    def policy(self) -> WarmupPolicy:
        return WarmupPolicy.GROWING_WINDOW if self is WarmupOption.GROWING else WarmupPolicy.SKIP

    @classmethod
    def default(cls) -> "WarmupOption":
        if settings.default_warmup == WarmupPolicy.SKIP.value:
            return cls.SKIP
        return cls.GROWING


class TwinsightGroup(TyperGroup):
    """Command group whose argument errors exit with the validation code.

    Click exits usage errors with 2, which the toolkit reserves for budget
    violations.
    """

    def parse_args(self, ctx: click.Context, args: list[str]) -> list[str]:
        try:
            return super().parse_args(ctx, args)
        except click.UsageError as exc:
            _use_validation_exit(exc)
            raise

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            _use_validation_exit(exc)
            raise


def _use_validation_exit(exc: click.UsageError) -> None:
    # Bare invocation prints help; keep click's own status for it
    if not isinstance(exc, getattr(click.exceptions, "NoArgsIsHelpError", ())):
        exc.exit_code = TwinValidationError.exit_code


@dataclass
class CommandRun:
    """Metadata a command fills in for the run log line."""

    command: str
    mode: str = "-"
    periods: int = 0
    processes: int = 0


def build_manifest(**fields: Any) -> RunManifest:
    """RunManifest from command-line values, with validation errors as diagnostics."""
    try:
        return RunManifest(**{key: value for key, value in fields.items() if value is not None})
    except ValidationError as exc:
        raise TwinValidationError(diagnostics_from_pydantic(exc))


def report_error(exc: TwinsightError, error_json: bool) -> None:
    """One stderr line per diagnostic; optionally an ErrorResponse document on stdout."""
    for diagnostic in exc.diagnostics or []:
        typer.echo(f"error: {diagnostic.render()}", err=True)
    if not exc.diagnostics:
        typer.echo(f"error: {exc.detail}", err=True)
    if error_json:
        response = ErrorResponse(
            detail=exc.detail,
            code=exc.code,
            exit_code=exc.exit_code,
            diagnostics=exc.diagnostics,
        )
        typer.echo(response.model_dump_json())


@contextmanager
def command_boundary(command: str, error_json: bool = False) -> Iterator[CommandRun]:
    """Run a command body, mapping toolkit errors to diagnostics and exit codes.

    Records the command duration and writes the metrics textfile when
    ``TWINSIGHT_METRICS_FILE`` is set.
    """
    run = CommandRun(command=command)
    start = time.perf_counter()
    status = "ok"
    try:
        yield run
    except typer.Exit:
        raise
    except TwinsightError as exc:
        status = exc.code
        report_error(exc, error_json)
        raise typer.Exit(code=exc.exit_code)
    except Exception:
        status = "internal_error"
        logger.exception("Unexpected error in command %s", command)
        typer.echo("error: internal error (set TWINSIGHT_LOG=DEBUG for details)", err=True)
        raise typer.Exit(code=1)
    finally:
        duration = time.perf_counter() - start
        COMMAND_DURATION_SECONDS.labels(command=command).observe(duration)
        log_run(logger, run.command, run.mode, run.periods, run.processes, duration * 1000, status)
        if settings.metrics_file:
            try:
                export_metrics(settings.metrics_file)
            except OSError as exc:
                logger.warning("metrics export failed: path=%s error=%s", settings.metrics_file, exc)
