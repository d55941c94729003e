"""``twinsight run``: evaluate one operating mode and write its reports."""

from pathlib import Path
from typing import Annotated

import typer

from app.commands.common import WarmupOption, build_manifest, command_boundary
from app.core.config import settings
from app.models.schemas import OutputFormat
from app.services.reports import format_report_value, write_run_reports
from app.services.runner import evaluate_manifest


def run_command(
    model: Annotated[
        Path | None, typer.Option("--model", help="Enterprise model CSV (period,<pid>...)")
    ] = None,
    competencies: Annotated[
        Path | None, typer.Option("--competencies", help="Competency matrix CSV")
    ] = None,
    scenario: Annotated[
        Path | None, typer.Option("--scenario", help="Intervention scenario file")
    ] = None,
    replay_totals: Annotated[
        Path | None,
        typer.Option("--replay-totals", help="Precomputed per-period totals CSV (t,total)"),
    ] = None,
    window: Annotated[
        int, typer.Option("--window", "-k", help="Window length k in periods")
    ] = settings.default_window,
    min_lags: Annotated[
        int, typer.Option("--min-lags", help="Minimum usable lags per window")
    ] = settings.default_min_lags,
    warmup: Annotated[
        WarmupOption, typer.Option("--warmup", help="Handling of periods with fewer than k lags")
    ] = WarmupOption.default(),
    exclude_diagonal: Annotated[
        bool, typer.Option("--exclude-diagonal", help="Drop the r_ii term from V_i(t)")
    ] = False,
    workers: Annotated[
        int, typer.Option("--workers", min=1, help="Threads for per-period evaluation")
    ] = settings.workers,
    out_dir: Annotated[Path, typer.Option("--out-dir", help="Report directory")] = Path("reports"),
    output_format: Annotated[
        OutputFormat, typer.Option("--format", help="Report formats to write")
    ] = OutputFormat.BOTH,
    label: Annotated[str | None, typer.Option("--label", help="Mode label in reports")] = None,
    error_json: Annotated[
        bool, typer.Option("--error-json", help="Print errors as a JSON document on stdout")
    ] = False,
) -> None:
    """Compute the integral indicator of one mode (baseline, or with a scenario)."""
    with command_boundary("run", error_json) as run:
        manifest = build_manifest(
            model=model,
            competencies=competencies,
            scenario=scenario,
            replay_totals=replay_totals,
            window=window,
            min_lags=min_lags,
            warmup=warmup.policy,
            include_diagonal=not exclude_diagonal,
            out_dir=out_dir,
            formats=output_format,
            label=label or ("intervention" if scenario is not None else "basic_mode"),
        )
        mode = evaluate_manifest(manifest, workers=workers)
        result = mode.result
        run.mode, run.periods, run.processes = result.mode_label, result.periods, result.n

        for path in write_run_reports(result, manifest.out_dir, manifest.formats):
            typer.echo(f"wrote {path}")
        typer.echo(
            f"{result.mode_label}: V={format_report_value(result.grand_total)} "
            f"degenerate={result.degenerate_count}"
        )
        if mode.projected_expense is not None:
            typer.echo(f"projected expense: {format_report_value(mode.projected_expense)}")
