"""File ingestion and canonical writing.

Readers accumulate every problem in a file as a located diagnostic and raise
a single TwinValidationError, so callers see all violations at once.

Formats:
    enterprise model   ``period,<pid1>,...,<pidn>``, one row per period
    competency matrix  ``competency,<pid1>,...,<pidn>``, cells 0/1
    totals replay      ``t,total``, optional closing ``Total,<value>`` row
    key-value configs  flat ``key: value`` lines (YAML subset)
"""

import math
import re
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import TwinIOError, TwinValidationError, diagnostics_from_pydantic
from app.core.logging import logger
from app.models.enterprise import CompetencyMatrix, EnterpriseModel
from app.models.results import IndicatorResult, ResultSource
from app.models.schemas import (
    Diagnostic,
    InterventionScenario,
    RunManifest,
    SynthSpec,
)

# Plain decimal literal: no thousands separators, no underscores, no nan/inf
DECIMAL_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$")
INTEGER_RE = re.compile(r"^[+-]?\d+$")
NON_FINITE_WORDS = {"nan", "inf", "infinity"}

SCENARIO_KEYS = {"label", "activation_period", "budget", "intervention_cost"}
SYNTH_KEYS = {"seed", "n", "T_max", "base_level", "noise_scale", "driver_weight", "label"}
MANIFEST_KEYS = {
    "model",
    "competencies",
    "scenario",
    "replay_totals",
    "window",
    "min_lags",
    "warmup",
    "include_diagonal",
    "label",
    "out_dir",
    "format",
}
MANIFEST_PATH_KEYS = ("model", "competencies", "scenario", "replay_totals", "out_dir")


# ----------------------------------------
# Low-level readers
# ----------------------------------------


# Marks rows wider than the header; the suffix indexes the kept fields
OVERFLOW_MARK = "\x00overflow:"


def _read_csv_rows(path: Path) -> list[tuple[int, list[str]]]:
    """Read non-blank CSV rows with their 1-based line numbers.

    The first line fixes the frame width. Short rows come back padded with
    missing cells and wide rows through ``on_bad_lines``; both are returned
    with their own field count so loaders can report them as ragged.
    """
    overflow: list[list[str]] = []

    def keep_overflow(fields: list[str]) -> list[str]:
        overflow.append(fields)
        return [f"{OVERFLOW_MARK}{len(overflow) - 1}"]

    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=object,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8-sig",
            engine="python",
            on_bad_lines=keep_overflow,
        )
    except pd.errors.EmptyDataError:
        return []
    except pd.errors.ParserError as exc:
        raise TwinValidationError([Diagnostic(path=str(path), message=f"unreadable CSV: {exc}")])
    except UnicodeDecodeError as exc:
        raise TwinValidationError([Diagnostic(path=str(path), message=f"not UTF-8 text: {exc}")])
    except OSError as exc:
        raise TwinIOError.from_os_error(exc, path)

    rows = []
    for line, record in enumerate(frame.itertuples(index=False, name=None), start=1):
        first = record[0]
        if isinstance(first, str) and first.startswith(OVERFLOW_MARK):
            fields = overflow[int(first.removeprefix(OVERFLOW_MARK))]
        else:
            fields = []
            for cell in record:
                if pd.isna(cell):
                    break
                fields.append(cell)
        cells = [str(cell).strip() for cell in fields]
        if any(cells):
            rows.append((line, cells))
    return rows


def read_csv_header(path: str | Path) -> list[str]:
    """First non-blank CSV row (empty list for an empty file)."""
    rows = _read_csv_rows(Path(path))
    return rows[0][1] if rows else []


def parse_number(cell: str) -> tuple[float | None, str | None]:
    """Parse a decimal cell.

    Returns:
        Tuple of (value, error message); exactly one is None
    """
    if cell.lower().lstrip("+-") in NON_FINITE_WORDS:
        return None, f"non-finite value '{cell}'"
    if not DECIMAL_RE.match(cell):
        return None, f"non-numeric cell '{cell}'"
    value = float(cell)
    if not math.isfinite(value):
        return None, f"non-finite value '{cell}'"
    return value, None


def _check_header(
    path: Path, line: int, header: list[str], first: str, kind: str
) -> tuple[list[str], list[Diagnostic]]:
    diags = []
    if header[0] != first:
        diags.append(
            Diagnostic(
                path=str(path),
                row=line,
                column="1",
                message=f"header must start with '{first}', got '{header[0]}'",
            )
        )
    ids = header[1:]
    if not ids:
        diags.append(Diagnostic(path=str(path), row=line, message=f"header declares no {kind} columns"))
    seen: dict[str, int] = {}
    for col, pid in enumerate(ids, start=2):
        if not pid:
            diags.append(
                Diagnostic(path=str(path), row=line, column=str(col), message=f"empty {kind} id")
            )
        elif pid in seen:
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=line,
                    column=str(col),
                    message=f"duplicate {kind} id '{pid}' (first in column {seen[pid]})",
                )
            )
        else:
            seen[pid] = col
    return ids, diags


def _check_contiguous(
    path: Path, entries: list[tuple[int, int]], allow_history: bool
) -> list[Diagnostic]:
    """Periods must ascend by one and cover 1..T_max (pre-history may precede 1)."""
    diags = []
    if not entries:
        return diags
    first_line, first = entries[0]
    if first > 1 or (not allow_history and first != 1):
        diags.append(
            Diagnostic(path=str(path), row=first_line, column="period", message=f"periods must start at 1, got {first}")
        )
    for (_, prev), (line, period) in zip(entries, entries[1:], strict=False):
        if period != prev + 1:
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=line,
                    column="period",
                    message=f"non-contiguous period {period}: expected {prev + 1}",
                )
            )
    last_line, last = entries[-1]
    if last < 1:
        diags.append(
            Diagnostic(path=str(path), row=last_line, column="period", message="no periods >= 1")
        )
    return diags


def _read_flat_mapping(path: Path) -> tuple[dict[str, Any], dict[str, int]]:
    """Read a flat ``key: value`` file.

    Returns:
        Tuple of (values by key, line number by key)
    """
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as exc:
        raise TwinValidationError([Diagnostic(path=str(path), message=f"not UTF-8 text: {exc}")])
    except OSError as exc:
        raise TwinIOError.from_os_error(exc, path)

    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        raise TwinValidationError(
            [
                Diagnostic(
                    path=str(path),
                    row=mark.line + 1 if mark is not None else None,
                    message=f"invalid key-value syntax: {problem}",
                )
            ]
        )

    if node is None:
        raise TwinValidationError([Diagnostic(path=str(path), row=1, message="empty file")])
    if not isinstance(node, yaml.MappingNode):
        raise TwinValidationError(
            [Diagnostic(path=str(path), row=1, message="expected flat 'key: value' lines")]
        )

    diags = []
    lines: dict[str, int] = {}
    for key_node, value_node in node.value:
        key = str(key_node.value)
        line = key_node.start_mark.line + 1
        if key in lines:
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=line,
                    column=key,
                    message=f"duplicate key '{key}' (first on line {lines[key]})",
                )
            )
            continue
        lines[key] = line
        if not isinstance(value_node, yaml.ScalarNode):
            diags.append(
                Diagnostic(path=str(path), row=line, column=key, message="nested values are not allowed")
            )
    if diags:
        raise TwinValidationError(diags)

    data = {str(k): v for k, v in (yaml.safe_load(text) or {}).items()}
    for key, value in data.items():
        if value is None:
            diags.append(
                Diagnostic(path=str(path), row=lines.get(key), column=key, message="missing value")
            )
    if diags:
        raise TwinValidationError(diags)
    return data, lines


# ----------------------------------------
# Enterprise model
# ----------------------------------------


def load_enterprise_model(path: str | Path, label: str | None = None) -> EnterpriseModel:
    """Load and validate an enterprise model CSV.

    Args:
        path: CSV with header ``period,<pid1>,...,<pidn>``
        label: Mode name; defaults to the file stem

    Returns:
        Validated EnterpriseModel; column order follows the header
    """
    path = Path(path)
    rows = _read_csv_rows(path)
    if not rows:
        raise TwinValidationError([Diagnostic(path=str(path), row=1, message="empty file")])

    header_line, header = rows[0]
    process_ids, diags = _check_header(path, header_line, header, "period", "process")
    width = len(header)
    if len(rows) == 1:
        diags.append(Diagnostic(path=str(path), row=header_line, message="no period rows"))

    periods: list[tuple[int, int]] = []
    seen_periods: dict[int, int] = {}
    matrix: list[list[float]] = []
    for line, row in rows[1:]:
        if len(row) != width:
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=line,
                    message=f"ragged row: expected {width} fields, got {len(row)}",
                )
            )
            continue

        row_ok = True
        if not INTEGER_RE.match(row[0]):
            diags.append(
                Diagnostic(
                    path=str(path), row=line, column="period", message=f"non-integer period '{row[0]}'"
                )
            )
            row_ok = False
        else:
            period = int(row[0])
            if period in seen_periods:
                diags.append(
                    Diagnostic(
                        path=str(path),
                        row=line,
                        column="period",
                        message=f"duplicate period index {period} (first on line {seen_periods[period]})",
                    )
                )
                row_ok = False
            else:
                seen_periods[period] = line

        values = []
        for col, cell in enumerate(row[1:], start=1):
            value, error = parse_number(cell)
            if error is not None:
                column = process_ids[col - 1] or str(col + 1)
                diags.append(Diagnostic(path=str(path), row=line, column=column, message=error))
                row_ok = False
            values.append(value)

        if row_ok:
            periods.append((line, period))
            matrix.append(values)

    if not diags:
        diags.extend(_check_contiguous(path, periods, allow_history=True))
    if diags:
        raise TwinValidationError(diags)

    history = [values for (_, period), values in zip(periods, matrix, strict=True) if period <= 0]
    current = [values for (_, period), values in zip(periods, matrix, strict=True) if period >= 1]
    n = len(process_ids)
    model = EnterpriseModel(
        process_ids=tuple(process_ids),
        values=np.array(current, dtype=np.float64).reshape(len(current), n),
        label=label or path.stem,
        history=np.array(history, dtype=np.float64).reshape(len(history), n),
    )
    logger.debug(
        "loaded model: path=%s periods=%d processes=%d history=%d",
        path,
        model.periods,
        model.n,
        model.history_length,
    )
    return model


def format_exact(value: float) -> str:
    """Shortest text that parses back to the same binary64 value."""
    return np.format_float_positional(np.float64(value), trim="-")


def write_enterprise_model(model: EnterpriseModel, path: str | Path) -> Path:
    """Write a model in canonical CSV form (round-trips through the loader)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = [
            [str(model.first_period + offset), *(format_exact(v) for v in row)]
            for offset, row in enumerate(model.lag_source)
        ]
        frame = pd.DataFrame(rows, columns=["period", *model.process_ids], dtype=object)
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as exc:
        raise TwinIOError.from_os_error(exc, path)
    return path


def total_expense(model: EnterpriseModel) -> float:
    """Sum X of all cells over periods 1..T_max (thousand rubles).

    Correctly rounded, hence invariant under any row or column permutation.
    """
    return math.fsum(model.values.ravel().tolist())


# ----------------------------------------
# Competency matrix
# ----------------------------------------


def load_competency_matrix(
    path: str | Path, model: EnterpriseModel | None = None
) -> CompetencyMatrix:
    """Load and validate a competency-to-process matrix CSV.

    Args:
        path: CSV with header ``competency,<pid1>,...,<pidn>``
        model: When given, the header must list the model's process ids in order

    Returns:
        Validated CompetencyMatrix with entries in {0, 1}
    """
    path = Path(path)
    rows = _read_csv_rows(path)
    if not rows:
        raise TwinValidationError([Diagnostic(path=str(path), row=1, message="empty file")])

    header_line, header = rows[0]
    process_ids, diags = _check_header(path, header_line, header, "competency", "process")
    width = len(header)
    if len(rows) == 1:
        diags.append(Diagnostic(path=str(path), row=header_line, message="no competency rows"))

    if model is not None and not diags and tuple(process_ids) != model.process_ids:
        if set(process_ids) == set(model.process_ids):
            message = f"process ids match model '{model.label}' but are in a different order"
        else:
            missing = sorted(set(model.process_ids) - set(process_ids))
            unknown = sorted(set(process_ids) - set(model.process_ids))
            message = (
                f"process ids do not match model '{model.label}' "
                f"(missing: {missing or 'none'}, unknown: {unknown or 'none'})"
            )
        diags.append(Diagnostic(path=str(path), row=header_line, message=message))

    competency_ids: list[str] = []
    seen: dict[str, int] = {}
    entries: list[list[int]] = []
    for index, (line, row) in enumerate(rows[1:], start=1):
        if len(row) != width:
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=line,
                    message=f"ragged row: expected {width} fields, got {len(row)}",
                )
            )
            continue
        cid = row[0]
        if not cid:
            diags.append(
                Diagnostic(path=str(path), row=line, column="competency", message="empty competency id")
            )
        elif cid in seen:
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=line,
                    column="competency",
                    message=f"duplicate competency id '{cid}' (first on line {seen[cid]})",
                )
            )
        else:
            seen[cid] = line

        values = []
        for j, cell in enumerate(row[1:], start=1):
            if cell not in ("0", "1"):
                diags.append(
                    Diagnostic(
                        path=str(path),
                        row=line,
                        column=process_ids[j - 1] or str(j + 1),
                        message=f"non-binary entry at ({index},{j}): '{cell}'",
                    )
                )
                values.append(0)
            else:
                values.append(int(cell))
        competency_ids.append(cid)
        entries.append(values)

    if diags:
        raise TwinValidationError(diags)

    return CompetencyMatrix(
        competency_ids=tuple(competency_ids),
        process_ids=tuple(process_ids),
        entries=np.array(entries, dtype=np.int8).reshape(len(entries), len(process_ids)),
    )


# ----------------------------------------
# Totals replay
# ----------------------------------------


def load_totals_replay(path: str | Path, label: str | None = None) -> IndicatorResult:
    """Load precomputed per-period totals (the shape of a published results table).

    A closing ``Total`` row is optional; when period rows are also present it
    must agree with their sum within ``settings.replay_total_tolerance``. A
    file holding only the ``Total`` row yields a total-only result.
    """
    path = Path(path)
    rows = _read_csv_rows(path)
    if not rows:
        raise TwinValidationError([Diagnostic(path=str(path), row=1, message="empty file")])

    header_line, header = rows[0]
    diags = []
    if len(header) != 2 or header[0] != "t":
        diags.append(
            Diagnostic(path=str(path), row=header_line, message="header must be 't,<total column>'")
        )
        raise TwinValidationError(diags)

    periods: list[tuple[int, int]] = []
    totals: list[float] = []
    declared: float | None = None
    declared_line: int | None = None
    for line, row in rows[1:]:
        if len(row) != 2:
            diags.append(
                Diagnostic(path=str(path), row=line, message=f"ragged row: expected 2 fields, got {len(row)}")
            )
            continue
        if declared_line is not None:
            diags.append(
                Diagnostic(path=str(path), row=line, message="rows after the Total row are not allowed")
            )
            continue
        value, error = parse_number(row[1])
        if error is not None:
            diags.append(Diagnostic(path=str(path), row=line, column=header[1], message=error))
            continue
        if row[0].lower() == "total":
            declared, declared_line = value, line
        elif INTEGER_RE.match(row[0]):
            periods.append((line, int(row[0])))
            totals.append(value)
        else:
            diags.append(
                Diagnostic(path=str(path), row=line, column="t", message=f"non-integer period '{row[0]}'")
            )

    if not periods and declared is None:
        diags.append(Diagnostic(path=str(path), row=header_line, message="no totals rows"))
    if not diags:
        diags.extend(_check_contiguous(path, periods, allow_history=False))

    grand_total = math.fsum(totals)
    if not diags and declared is not None and periods:
        gap = abs(declared - grand_total)
        if gap > settings.replay_total_tolerance:
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=declared_line,
                    column=header[1],
                    message=f"declared Total {declared} differs from the sum of periods {grand_total!r}",
                )
            )
    if diags:
        raise TwinValidationError(diags)

    if not periods:
        grand_total = float(declared)

    per_period = np.array(totals, dtype=np.float64)
    per_period.setflags(write=False)
    per_process = np.empty((len(totals), 0))
    per_process.setflags(write=False)
    return IndicatorResult(
        mode_label=label or path.stem,
        process_ids=(),
        per_process=per_process,
        per_period_total=per_period,
        grand_total=grand_total,
        source=ResultSource.REPLAY,
    )


# ----------------------------------------
# Key-value configs
# ----------------------------------------


def _effect_key(key: str) -> tuple[str, str] | None:
    """Split ``effect.<competency_id>.<add|mul>``."""
    if not key.startswith("effect."):
        return None
    stem, _, suffix = key.rpartition(".")
    if suffix not in ("add", "mul"):
        return None
    competency_id = stem[len("effect.") :]
    if not competency_id:
        return None
    return competency_id, suffix


def load_scenario(path: str | Path) -> InterventionScenario:
    """Load an intervention scenario from a flat key-value file.

    Keys: ``activation_period``, ``budget``, ``intervention_cost``, ``label``
    and repeated ``effect.<competency_id>.add`` / ``effect.<competency_id>.mul``.
    """
    path = Path(path)
    data, lines = _read_flat_mapping(path)

    diags = []
    fields: dict[str, Any] = {}
    effects: dict[str, dict[str, Any]] = {}
    for key, value in data.items():
        if key in SCENARIO_KEYS:
            fields[key] = value
            continue
        parsed = _effect_key(key)
        if parsed is None:
            diags.append(
                Diagnostic(path=str(path), row=lines.get(key), column=key, message=f"unknown key '{key}'")
            )
            continue
        competency_id, suffix = parsed
        effects.setdefault(competency_id, {"competency_id": competency_id})[suffix] = value
    if diags:
        raise TwinValidationError(diags)

    effect_ids = list(effects)
    try:
        scenario = InterventionScenario(**fields, effects=tuple(effects.values()))
    except ValidationError as exc:
        for error in exc.errors():
            loc = error.get("loc", ())
            if len(loc) >= 3 and loc[0] == "effects":
                key = f"effect.{effect_ids[int(loc[1])]}.{loc[2]}"
            else:
                key = str(loc[0]) if loc else None
            diags.append(
                Diagnostic(
                    path=str(path),
                    row=lines.get(key) if key else None,
                    column=key,
                    message=f"{key}: {error.get('msg')}" if key else error.get("msg", "invalid"),
                )
            )
        raise TwinValidationError(diags)

    return scenario.with_key_lines(lines)


def check_scenario_references(
    scenario: InterventionScenario,
    matrix: CompetencyMatrix,
    model: EnterpriseModel | None = None,
    path: str | Path | None = None,
) -> list[Diagnostic]:
    """Cross-file checks: effect competencies exist; activation within the model."""
    source = str(path) if path is not None else None
    diags = []
    known = set(matrix.competency_ids)
    for competency_id in scenario.competency_ids:
        if competency_id not in known:
            diags.append(
                Diagnostic(
                    path=source,
                    row=scenario.line_of(competency_id),
                    column=f"effect.{competency_id}",
                    message=f"unknown competency '{competency_id}'",
                )
            )
    if model is not None and scenario.activation_period > model.periods:
        diags.append(
            Diagnostic(
                path=source,
                row=scenario.key_line("activation_period"),
                column="activation_period",
                message=(
                    f"activation_period {scenario.activation_period} is beyond "
                    f"T_max {model.periods} of model '{model.label}'"
                ),
            )
        )
    return diags


def _parse_group(value: Any) -> tuple[int, ...] | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return (value,)
    items = [item.strip() for item in str(value).split(",")]
    if not items or not all(INTEGER_RE.match(item) for item in items):
        return None
    return tuple(int(item) for item in items)


def load_synth_spec(path: str | Path) -> SynthSpec:
    """Load a synthetic-enterprise spec from a flat key-value file.

    Keys: ``seed``, ``n``, ``T_max``, ``base_level``, ``noise_scale``,
    ``driver_weight``, ``label`` and repeated ``group.<name>: "1,2,3"``.
    """
    path = Path(path)
    data, lines = _read_flat_mapping(path)

    diags = []
    fields: dict[str, Any] = {}
    groups: list[tuple[int, ...]] = []
    for key, value in data.items():
        if key in SYNTH_KEYS:
            fields[key] = value
        elif key.startswith("group.") and len(key) > len("group."):
            group = _parse_group(value)
            if group is None:
                diags.append(
                    Diagnostic(
                        path=str(path),
                        row=lines[key],
                        column=key,
                        message=f"group must list 1-based process indices like \"1,2,3\", got '{value}'",
                    )
                )
            else:
                groups.append(group)
        else:
            diags.append(
                Diagnostic(path=str(path), row=lines.get(key), column=key, message=f"unknown key '{key}'")
            )
    if diags:
        raise TwinValidationError(diags)

    try:
        return SynthSpec(**fields, correlation_groups=tuple(groups) if groups else None)
    except ValidationError as exc:
        raise TwinValidationError(diagnostics_from_pydantic(exc, path, lines))


def load_manifest(path: str | Path) -> RunManifest:
    """Load a run manifest; relative paths resolve against the manifest's directory."""
    path = Path(path)
    data, lines = _read_flat_mapping(path)

    diags = []
    fields: dict[str, Any] = {}
    field_lines: dict[str, int] = {}
    for key, value in data.items():
        if key not in MANIFEST_KEYS:
            diags.append(
                Diagnostic(path=str(path), row=lines.get(key), column=key, message=f"unknown key '{key}'")
            )
            continue
        if key in MANIFEST_PATH_KEYS:
            target = Path(str(value))
            value = target if target.is_absolute() else path.parent / target
        elif key == "warmup" and value == "growing":
            value = "growing_window"
        field = "formats" if key == "format" else key
        fields[field] = value
        field_lines[field] = lines[key]
    if diags:
        raise TwinValidationError(diags)

    try:
        return RunManifest(**fields)
    except ValidationError as exc:
        raise TwinValidationError(diagnostics_from_pydantic(exc, path, field_lines))


def iter_config_keys(path: str | Path) -> Iterator[str]:
    """Keys of a flat key-value file (used to sniff the file kind)."""
    data, _ = _read_flat_mapping(Path(path))
    yield from data
