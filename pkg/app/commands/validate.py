"""``twinsight validate``: check input files without computing anything."""

from pathlib import Path
from typing import Annotated

import typer

from app.commands.common import command_boundary
from app.core.errors import TwinValidationError
from app.services.validation import validate_paths


def validate_command(
    paths: Annotated[list[Path], typer.Argument(help="Files to check")],
    error_json: Annotated[
        bool, typer.Option("--error-json", help="Print errors as a JSON document on stdout")
    ] = False,
) -> None:
    """Validate models, matrices, scenarios, specs, manifests and totals files."""
    with command_boundary("validate", error_json) as run:
        checks = validate_paths(paths)
        run.processes = len(checks)
        for check in checks:
            if check.ok:
                typer.echo(check.lines()[0])
        problems = [diagnostic for check in checks for diagnostic in check.diagnostics]
        if problems:
            raise TwinValidationError(problems)
