"""Integral indicator engine.

For each period t the engine takes the L trailing observations of the n
process series (lags t-1 .. t-L), z-scores every column within the window
(sample standard deviation, divisor L-1), forms the correlation matrix
r_ij(t) = (1/(L-1)) * sum_l z_i(l) z_j(l) and reports the row sums of
|r_ij(t)| as V_i(t). Per-period totals and the grand total V aggregate
those values with correctly rounded summation.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from app.core.config import settings
from app.core.errors import TwinValidationError
from app.core.metrics import DEGENERATE_WINDOWS_TOTAL, WINDOWS_EVALUATED_TOTAL
from app.models.enterprise import EnterpriseModel
from app.models.results import CorrelationSnapshot, IndicatorResult, ResultSource
from app.models.schemas import WarmupPolicy, WindowConfig
from app.services.ingest import total_expense

# Series name of per-period totals in long-format dynamics
TOTAL_SERIES = "total"


def available_lags(series: EnterpriseModel, t: int) -> int:
    """Number of observations strictly before period t, pre-history included."""
    return t - 1 + series.history_length


def window_matrix(series: EnterpriseModel, t: int, cfg: WindowConfig) -> np.ndarray:
    """Lag matrix for period t.

    Row 1 is lag 1 (period t-1), row L is lag L (period t-L). L is
    min(k, available lags) under growing_window and exactly k under skip.

    Raises:
        TwinValidationError: t outside the model, no lags, or skip without k lags
    """
    if not 1 <= t <= series.periods:
        raise TwinValidationError(f"period {t} is outside 1..{series.periods}")
    available = available_lags(series, t)
    if available < 1:
        raise TwinValidationError(f"period {t} has no lag history (t >= 2 required)")

    if cfg.warmup_policy == WarmupPolicy.SKIP:
        if available < cfg.k:
            raise TwinValidationError(
                f"skip policy needs {cfg.k} lags at period {t}, only {available} available"
            )
        lags = cfg.k
    else:
        lags = min(cfg.k, available)

    # Row of period t in the stacked source; lag l sits at row end - l
    end = t - series.first_period
    return series.lag_source[end - lags : end][::-1]


def standardize_columns(window: np.ndarray) -> tuple[np.ndarray, frozenset[int]]:
    """Z-score every column of a window.

    Zero-variance columns come back zero-filled and are reported as degenerate.

    Returns:
        Tuple of (standardized matrix, degenerate column indices)
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[0] < 2:
        raise TwinValidationError(
            f"standardization needs at least 2 rows, got shape {window.shape}"
        )
    rows = window.shape[0]

    constant = window.max(axis=0) == window.min(axis=0)
    centered = window - window.mean(axis=0)

    # Scale before squaring so large money values cannot overflow
    scale = np.abs(centered).max(axis=0)
    scale[constant | (scale == 0)] = 1.0
    std = scale * np.sqrt(((centered / scale) ** 2).sum(axis=0) / (rows - 1))
    degenerate = constant | ~(std > 0) | ~np.isfinite(std)

    standardized = np.zeros_like(window)
    usable = ~degenerate
    standardized[:, usable] = centered[:, usable] / std[usable]
    return standardized, frozenset(int(j) for j in np.flatnonzero(degenerate))


def _insufficient_snapshot(t: int, n: int, rows_used: int) -> CorrelationSnapshot:
    identity = np.eye(n)
    identity.setflags(write=False)
    return CorrelationSnapshot(t=t, matrix=identity, window_rows_used=rows_used, insufficient=True)


def correlation_matrix(series: EnterpriseModel, t: int, cfg: WindowConfig) -> CorrelationSnapshot:
    """Correlation snapshot ||r_ij(t)|| for one period.

    Windows with fewer than ``cfg.min_lags`` rows return an insufficient
    snapshot (identity matrix) that ``integral_index`` turns into zeros.
    Pairs involving a degenerate column are 0 off the diagonal; the diagonal
    is always exactly 1.
    """
    window = window_matrix(series, t, cfg)
    rows = window.shape[0]
    if rows < cfg.min_lags:
        return _insufficient_snapshot(t, series.n, rows)

    standardized, degenerate = standardize_columns(window)
    # Lag-by-lag accumulation in row order, no BLAS
    gram = np.zeros((series.n, series.n))
    for row in standardized:
        gram += np.outer(row, row)
    gram /= rows - 1

    # One value per unordered pair: mirror the upper triangle
    upper = np.triu(gram)
    matrix = upper + np.triu(upper, 1).T
    np.clip(matrix, -1.0, 1.0, out=matrix)
    np.fill_diagonal(matrix, 1.0)
    matrix.setflags(write=False)

    return CorrelationSnapshot(
        t=t, matrix=matrix, window_rows_used=rows, degenerate=degenerate, insufficient=False
    )


def integral_index(snapshot: CorrelationSnapshot, include_diagonal: bool = True) -> np.ndarray:
    """V_i(t) = sum_j |r_ij(t)| for every process i.

    Fully degenerate or insufficient snapshots give zeros.
    """
    if snapshot.fully_degenerate:
        return np.zeros(snapshot.n)
    magnitudes = np.abs(snapshot.matrix)
    if not include_diagonal:
        magnitudes = magnitudes.copy()
        np.fill_diagonal(magnitudes, 0.0)
    return np.array([math.fsum(row) for row in magnitudes.tolist()])


@dataclass(frozen=True)
class _PeriodOutcome:
    values: np.ndarray
    flagged: tuple[int, ...]
    fully_degenerate: bool


def _evaluate_period(series: EnterpriseModel, t: int, cfg: WindowConfig) -> _PeriodOutcome:
    needed = cfg.k if cfg.warmup_policy == WarmupPolicy.SKIP else cfg.min_lags
    if available_lags(series, t) < needed:
        return _PeriodOutcome(np.zeros(series.n), tuple(range(series.n)), True)

    snapshot = correlation_matrix(series, t, cfg)
    values = integral_index(snapshot, include_diagonal=cfg.include_diagonal)
    if snapshot.fully_degenerate:
        return _PeriodOutcome(values, tuple(range(series.n)), True)
    return _PeriodOutcome(values, tuple(sorted(snapshot.degenerate)), False)


def run_indicator(
    series: EnterpriseModel,
    cfg: WindowConfig,
    workers: int | None = None,
    label: str | None = None,
) -> IndicatorResult:
    """Compute V_i(t) for t = 1..T_max, per-period totals and the grand total V.

    Periods are independent, so they may run on a thread pool; outcomes are
    collected in period order and every sum is correctly rounded, so the
    result is bit-identical for any worker count.

    Args:
        series: Process series (base model or controlled series)
        cfg: Window configuration
        workers: Thread count; defaults to ``settings.workers``
        label: Mode label; defaults to the series label
    """
    workers = workers or settings.workers
    periods = range(1, series.periods + 1)

    def evaluate(t: int) -> _PeriodOutcome:
        return _evaluate_period(series, t, cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(evaluate, periods))
    else:
        outcomes = [evaluate(t) for t in periods]

    per_process = np.vstack([outcome.values for outcome in outcomes])
    per_process.setflags(write=False)
    per_period_total = np.array([math.fsum(row) for row in per_process.tolist()])
    per_period_total.setflags(write=False)
    flags = tuple(
        (t, series.process_ids[j])
        for t, outcome in zip(periods, outcomes, strict=True)
        for j in outcome.flagged
    )

    policy = cfg.warmup_policy.value
    WINDOWS_EVALUATED_TOTAL.labels(policy=policy).inc(len(outcomes))
    DEGENERATE_WINDOWS_TOTAL.labels(policy=policy).inc(
        sum(1 for outcome in outcomes if outcome.fully_degenerate)
    )

    return IndicatorResult(
        mode_label=label or series.label,
        process_ids=series.process_ids,
        per_process=per_process,
        per_period_total=per_period_total,
        grand_total=math.fsum(per_period_total.tolist()),
        degenerate_flags=flags,
        window=cfg,
        source=ResultSource.COMPUTED,
        total_expense=total_expense(series),
    )


@dataclass(frozen=True)
class DynamicsRecord:
    """One point of a plot-ready long-format series."""

    t: int
    series: str
    value: float


@dataclass(frozen=True)
class IndicatorDynamics:
    """Per-period totals and per-process traces of one mode."""

    mode_label: str
    totals: tuple[DynamicsRecord, ...]
    traces: tuple[DynamicsRecord, ...]

    def records(self) -> list[DynamicsRecord]:
        """Long format ordered by t, totals first, then processes in column order."""
        return sorted(
            [*self.totals, *self.traces],
            key=lambda r: (r.t, r.series != TOTAL_SERIES),
        )


def indicator_dynamics(result: IndicatorResult) -> IndicatorDynamics:
    """Dynamics of the integral indicator, ready for plotting."""
    totals = tuple(
        DynamicsRecord(t=t, series=TOTAL_SERIES, value=float(value))
        for t, value in enumerate(result.per_period_total.tolist(), start=1)
    )
    traces = tuple(
        DynamicsRecord(t=t, series=process_id, value=float(row[j]))
        for t, row in enumerate(result.per_process.tolist(), start=1)
        for j, process_id in enumerate(result.process_ids)
    )
    return IndicatorDynamics(mode_label=result.mode_label, totals=totals, traces=traces)
