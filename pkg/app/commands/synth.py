"""``twinsight synth``: write a synthetic enterprise model."""

from pathlib import Path
from typing import Annotated

import typer

from app.commands.common import command_boundary
from app.services.ingest import load_synth_spec, write_enterprise_model
from app.services.synth import generate


def synth_command(
    spec: Annotated[Path, typer.Option("--spec", help="Synthetic enterprise spec file")],
    output: Annotated[Path, typer.Option("--output", "-o", help="Model CSV to write")],
    error_json: Annotated[
        bool, typer.Option("--error-json", help="Print errors as a JSON document on stdout")
    ] = False,
) -> None:
    """Generate a deterministic synthetic model from a seed and structure spec."""
    with command_boundary("synth", error_json) as run:
        model = generate(load_synth_spec(spec))
        run.mode, run.periods, run.processes = model.label, model.periods, model.n
        typer.echo(f"wrote {write_enterprise_model(model, output)}")
