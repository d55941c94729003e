"""Twinsight - digital-twin enterprise analytics.

Main typer application entry point.
"""

from typing import Annotated

import typer

from app import __version__
from app.commands.common import TwinsightGroup
from app.commands.compare import compare_command
from app.commands.run import run_command
from app.commands.synth import synth_command
from app.commands.validate import validate_command
from app.core.config import settings
from app.core.logging import setup_logging

app = typer.Typer(
    cls=TwinsightGroup,
    name=settings.app_name,
    help="Sliding-window correlation indicator for enterprise process models.",
    no_args_is_help=True,
    add_completion=False,
    rich_markup_mode=None,
)


def _show_version(value: bool) -> None:
    if value:
        typer.echo(f"{settings.app_name} {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    log_level: Annotated[
        str | None,
        typer.Option("--log-level", help="Diagnostic verbosity (overrides TWINSIGHT_LOG)"),
    ] = None,
    _version: Annotated[
        bool,
        typer.Option(
            "--version", callback=_show_version, is_eager=True, help="Show version and exit"
        ),
    ] = False,
) -> None:
    """Digital-twin enterprise analytics toolkit."""
    if log_level:
        setup_logging(log_level)


app.command("run")(run_command)
app.command("compare")(compare_command)
app.command("synth")(synth_command)
app.command("validate")(validate_command)
