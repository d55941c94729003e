"""Report writers.

CSV reports carry numbers with a fixed number of significant digits so
repeated runs are byte-identical; JSON documents carry full binary64
precision. Raw input series are never copied into reports, only indicator
values.
"""

from collections.abc import Iterable
from pathlib import Path

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.errors import TwinIOError
from app.models.results import IndicatorResult, ModeComparison
from app.models.schemas import ComparisonReport, OutputFormat, RunSummary
from app.services.indicator import indicator_dynamics

INDICATOR_FILE = "indicator.csv"
TOTALS_FILE = "totals.csv"
DYNAMICS_FILE = "dynamics.csv"
SUMMARY_FILE = "summary.json"
COMPARISON_FILE = "comparison.json"
DELTAS_FILE = "deltas.csv"


def format_report_value(value: float, digits: int | None = None) -> str:
    """Positional text with ``digits`` significant digits, round-half-even.

    Negative zero is written as ``0``.
    """
    digits = digits or settings.csv_significant_digits
    text = np.format_float_positional(
        np.float64(value), precision=digits, unique=False, fractional=False, trim="-"
    )
    return "0" if text == "-0" else text


def _write_csv(path: Path, header: list[str], rows: Iterable[list[str]]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(list(rows), columns=header, dtype=object)
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as exc:
        raise TwinIOError.from_os_error(exc, path)
    return path


def _write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise TwinIOError.from_os_error(exc, path)
    return path


def write_indicator_csv(result: IndicatorResult, path: Path) -> Path:
    """Long format ``mode,t,process,V_i``."""
    rows = (
        [result.mode_label, str(t), process_id, format_report_value(row[j])]
        for t, row in enumerate(result.per_process.tolist(), start=1)
        for j, process_id in enumerate(result.process_ids)
    )
    return _write_csv(path, ["mode", "t", "process", "V_i"], rows)


def write_totals_csv(result: IndicatorResult, path: Path) -> Path:
    """Per-period totals ``mode,t,total`` closed by ``mode,Total,<V>``."""
    rows = [
        [result.mode_label, str(t), format_report_value(total)]
        for t, total in enumerate(result.per_period_total.tolist(), start=1)
    ]
    rows.append([result.mode_label, "Total", format_report_value(result.grand_total)])
    return _write_csv(path, ["mode", "t", "total"], rows)


def write_dynamics_csv(result: IndicatorResult, path: Path) -> Path:
    """Plot-ready ``mode,t,series,value`` records."""
    dynamics = indicator_dynamics(result)
    rows = (
        [dynamics.mode_label, str(record.t), record.series, format_report_value(record.value)]
        for record in dynamics.records()
    )
    return _write_csv(path, ["mode", "t", "series", "value"], rows)


def run_summary(result: IndicatorResult) -> RunSummary:
    return RunSummary(
        mode=result.mode_label,
        grand_total=result.grand_total,
        degenerate_count=result.degenerate_count,
        k=result.window.k if result.window is not None else None,
        policy=result.window.warmup_policy.value if result.window is not None else None,
    )


def write_run_reports(result: IndicatorResult, out_dir: str | Path, formats: OutputFormat) -> list[Path]:
    """Write every report of one mode evaluation.

    Replay results have no per-process values, so ``indicator.csv`` is only
    written for computed results.

    Returns:
        Paths written, in a fixed order
    """
    out_dir = Path(out_dir)
    written = []
    if formats.wants_csv:
        if result.n:
            written.append(write_indicator_csv(result, out_dir / INDICATOR_FILE))
        written.append(write_totals_csv(result, out_dir / TOTALS_FILE))
        written.append(write_dynamics_csv(result, out_dir / DYNAMICS_FILE))
    if formats.wants_json:
        written.append(_write_text(out_dir / SUMMARY_FILE, run_summary(result).model_dump_json()))
    return written


def comparison_report(comparison: ModeComparison) -> ComparisonReport:
    return ComparisonReport(
        baseline_total=comparison.baseline.grand_total,
        intervention_total=comparison.intervention.grand_total,
        delta_v=comparison.delta_v,
        cost_delta=comparison.cost_delta,
        budget_status=comparison.budget_status,
    )


def write_deltas_csv(comparison: ModeComparison, path: Path) -> Path:
    """Per-period ``t,baseline,intervention,delta``; header only for total-only modes."""
    rows = (
        [
            str(t),
            format_report_value(baseline),
            format_report_value(intervention),
            format_report_value(delta),
        ]
        for t, (baseline, intervention, delta) in enumerate(
            zip(
                comparison.baseline.per_period_total.tolist(),
                comparison.intervention.per_period_total.tolist(),
                comparison.per_period_delta.tolist(),
                strict=False,
            ),
            start=1,
        )
    )
    return _write_csv(path, ["t", "baseline", "intervention", "delta"], rows)


def write_comparison_reports(
    comparison: ModeComparison, out_dir: str | Path, formats: OutputFormat
) -> list[Path]:
    """Write ``comparison.json`` and ``deltas.csv`` as selected."""
    out_dir = Path(out_dir)
    written = []
    if formats.wants_json:
        report = comparison_report(comparison)
        written.append(_write_text(out_dir / COMPARISON_FILE, report.model_dump_json()))
    if formats.wants_csv:
        written.append(write_deltas_csv(comparison, out_dir / DELTAS_FILE))
    return written
