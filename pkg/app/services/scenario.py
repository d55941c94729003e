"""Scenario engine.

Turns a base enterprise model, a competency matrix and an intervention
scenario into controlled process series, checks the resource limit
C(V) <= C, and compares two operating modes.
"""

import math

import numpy as np

from app.core.config import settings
from app.core.errors import ShapeMismatchError, TwinValidationError
from app.core.logging import logger
from app.models.enterprise import CompetencyMatrix, ControlledSeries, EnterpriseModel
from app.models.results import BudgetReport, IndicatorResult, ModeComparison
from app.models.schemas import Diagnostic, InterventionScenario
from app.services.ingest import check_scenario_references


def apply_scenario(
    base: EnterpriseModel, cm: CompetencyMatrix, sc: InterventionScenario
) -> ControlledSeries:
    """Apply competency effects from the activation period onwards.

    Every process covered by at least one effect's competency becomes
    ``value * prod(mul) + sum(add)`` for t >= activation_period. Factors are
    multiplied in ascending order and deltas summed with fsum, so the result
    does not depend on effect order. Earlier periods and uncovered processes
    are copied unchanged.

    Raises:
        TwinValidationError: process sets differ, unknown competency, or
            activation beyond T_max
    """
    if not cm.matches(base):
        raise TwinValidationError(
            f"competency matrix process ids do not match model '{base.label}'"
        )
    problems = check_scenario_references(sc, cm, base)
    if problems:
        raise TwinValidationError(problems)

    factors: list[list[float]] = [[] for _ in range(base.n)]
    deltas: list[list[float]] = [[] for _ in range(base.n)]
    for effect in sc.effects:
        for j in np.flatnonzero(cm.coverage(effect.competency_id)):
            factors[j].append(effect.mul)
            deltas[j].append(effect.add)

    values = np.array(base.values, copy=True)
    start = sc.activation_period - 1
    applied: list[float] = []
    for j in range(base.n):
        if not factors[j]:
            continue
        mul = math.prod(sorted(factors[j]))
        add = math.fsum(deltas[j])
        original = base.values[start:, j]
        updated = original * mul + add
        values[start:, j] = updated
        applied.extend((updated - original).tolist())
    applied_delta = math.fsum(applied)

    gap = abs(sc.intervention_cost - applied_delta)
    if sc.effects and gap > settings.cost_tolerance:
        logger.warning(
            "scenario cost differs from applied effects: scenario=%s declared=%.3f applied=%.3f",
            sc.label,
            sc.intervention_cost,
            applied_delta,
        )

    return ControlledSeries(
        process_ids=base.process_ids,
        values=values,
        label=sc.label,
        history=base.history,
        activation_period=sc.activation_period,
        applied_delta=applied_delta,
    )


def check_budget(sc: InterventionScenario) -> BudgetReport:
    """C(V) <= C check; a violation is reported, not raised."""
    return BudgetReport(intervention_cost=sc.intervention_cost, budget=sc.budget)


def scenario_cost_projection(base_total: float, sc: InterventionScenario) -> float:
    """Projected total expense with the intervention paid for."""
    return base_total + sc.intervention_cost


def compare_modes(
    baseline: IndicatorResult,
    intervention: IndicatorResult,
    budget: BudgetReport | None = None,
) -> ModeComparison:
    """delta_v = V(intervention) - V(baseline), plus per-period deltas.

    Total-only results are compared on grand totals alone.

    Raises:
        ShapeMismatchError: window, process count or period count differ
    """
    problems = []
    if baseline.window != intervention.window:
        problems.append("window configurations differ")
    if baseline.n != intervention.n:
        problems.append(f"process counts differ: {baseline.n} vs {intervention.n}")
    both_series = not baseline.is_total_only and not intervention.is_total_only
    if both_series and baseline.periods != intervention.periods:
        problems.append(f"period counts differ: {baseline.periods} vs {intervention.periods}")
    if problems:
        raise ShapeMismatchError(
            [
                Diagnostic(
                    column=f"{baseline.mode_label} vs {intervention.mode_label}", message=problem
                )
                for problem in problems
            ]
        )

    per_period_delta = (
        intervention.per_period_total - baseline.per_period_total if both_series else np.empty(0)
    )
    per_period_delta.setflags(write=False)

    cost_delta = None
    if baseline.total_expense is not None and intervention.total_expense is not None:
        cost_delta = intervention.total_expense - baseline.total_expense

    return ModeComparison(
        baseline=baseline,
        intervention=intervention,
        delta_v=intervention.grand_total - baseline.grand_total,
        cost_delta=cost_delta,
        per_period_delta=per_period_delta,
        budget=budget,
    )
