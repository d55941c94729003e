"""Result types of the indicator and scenario engines."""

from dataclasses import dataclass, field
from app._compat import StrEnum

import numpy as np

from app.models.schemas import BudgetStatus, WindowConfig


class ResultSource(StrEnum):
    COMPUTED = "computed"  # derived from process series
    REPLAY = "replay"  # per-period totals read from a file


@dataclass(frozen=True, eq=False)
class CorrelationSnapshot:
    """Correlation matrix ||r_ij(t)|| of one window."""

    t: int
    matrix: np.ndarray
    window_rows_used: int
    degenerate: frozenset[int] = frozenset()
    insufficient: bool = False

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def fully_degenerate(self) -> bool:
        """No usable correlation information in this window."""
        return self.insufficient or len(self.degenerate) == self.n


@dataclass(frozen=True, eq=False)
class IndicatorResult:
    """Integral indicator of one operating mode.

    For computed results ``per_period_total[t]`` is the correctly rounded
    row sum of ``per_process`` and ``grand_total`` the correctly rounded sum
    of ``per_period_total``. Replay results carry no per-process matrix; a
    total-only replay carries no per-period series either.
    """

    mode_label: str
    process_ids: tuple[str, ...]
    per_process: np.ndarray
    per_period_total: np.ndarray
    grand_total: float
    degenerate_flags: tuple[tuple[int, str], ...] = ()
    window: WindowConfig | None = None
    source: ResultSource = ResultSource.COMPUTED
    total_expense: float | None = None

    @property
    def periods(self) -> int:
        return int(self.per_period_total.shape[0])

    @property
    def n(self) -> int:
        return len(self.process_ids)

    @property
    def degenerate_count(self) -> int:
        return len(self.degenerate_flags)

    @property
    def is_total_only(self) -> bool:
        return self.periods == 0


@dataclass(frozen=True)
class BudgetReport:
    """Outcome of the C(V) <= C check."""

    intervention_cost: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.intervention_cost <= self.budget

    @property
    def excess(self) -> float:
        return max(0.0, self.intervention_cost - self.budget)

    @property
    def status(self) -> BudgetStatus:
        return BudgetStatus.PASS if self.passed else BudgetStatus.VIOLATION


@dataclass(frozen=True, eq=False)
class ModeComparison:
    """Baseline vs intervention: delta_v = V_intervention - V_baseline."""

    baseline: IndicatorResult
    intervention: IndicatorResult
    delta_v: float
    cost_delta: float | None
    per_period_delta: np.ndarray = field(default_factory=lambda: np.empty(0))
    budget: BudgetReport | None = None

    @property
    def budget_status(self) -> BudgetStatus:
        return BudgetStatus.NONE if self.budget is None else self.budget.status
