"""``twinsight compare``: baseline vs intervention, delta_v and per-period deltas."""

from pathlib import Path
from typing import Annotated

import typer

from app.commands.common import command_boundary
from app.core.config import settings
from app.models.schemas import OutputFormat
from app.services.ingest import load_manifest
from app.services.reports import format_report_value, write_comparison_reports
from app.services.runner import compare_manifests


def compare_command(
    baseline: Annotated[Path, typer.Option("--baseline", help="Baseline mode manifest")],
    intervention: Annotated[
        Path, typer.Option("--intervention", help="Intervention mode manifest")
    ],
    out_dir: Annotated[Path, typer.Option("--out-dir", help="Report directory")] = Path("reports"),
    output_format: Annotated[
        OutputFormat, typer.Option("--format", help="Report formats to write")
    ] = OutputFormat.BOTH,
    workers: Annotated[
        int, typer.Option("--workers", min=1, help="Threads for per-period evaluation")
    ] = settings.workers,
    error_json: Annotated[
        bool, typer.Option("--error-json", help="Print errors as a JSON document on stdout")
    ] = False,
) -> None:
    """Evaluate two manifests and report delta_v = V(intervention) - V(baseline)."""
    with command_boundary("compare", error_json) as run:
        baseline_manifest = load_manifest(baseline)
        intervention_manifest = load_manifest(intervention)
        _, _, comparison = compare_manifests(baseline_manifest, intervention_manifest, workers)
        run.mode = f"{comparison.baseline.mode_label}->{comparison.intervention.mode_label}"
        run.periods, run.processes = comparison.intervention.periods, comparison.intervention.n

        for path in write_comparison_reports(comparison, out_dir, output_format):
            typer.echo(f"wrote {path}")
        typer.echo(
            f"delta_v={format_report_value(comparison.delta_v)} "
            f"budget={comparison.budget_status.value}"
        )
