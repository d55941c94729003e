"""Mode evaluation pipeline: manifest -> inputs -> scenario -> indicator."""

from dataclasses import dataclass
from pathlib import Path

from app.core.errors import BudgetViolationError, TwinValidationError
from app.models.enterprise import EnterpriseModel
from app.models.results import BudgetReport, IndicatorResult, ModeComparison
from app.models.schemas import Diagnostic, InterventionScenario, RunManifest
from app.services.indicator import run_indicator
from app.services.ingest import (
    check_scenario_references,
    load_competency_matrix,
    load_enterprise_model,
    load_scenario,
    load_totals_replay,
    total_expense,
)
from app.services.scenario import (
    apply_scenario,
    check_budget,
    compare_modes,
    scenario_cost_projection,
)


@dataclass(frozen=True, eq=False)
class ModeRun:
    """One evaluated operating mode."""

    manifest: RunManifest
    result: IndicatorResult
    series: EnterpriseModel | None = None
    scenario: InterventionScenario | None = None
    budget: BudgetReport | None = None
    base_expense: float | None = None

    @property
    def projected_expense(self) -> float | None:
        """Base total expense plus the intervention cost, when a scenario applies."""
        if self.scenario is None or self.base_expense is None:
            return None
        return scenario_cost_projection(self.base_expense, self.scenario)


def budget_violation(report: BudgetReport, path: Path | None = None) -> BudgetViolationError:
    return BudgetViolationError(
        [
            Diagnostic(
                path=str(path) if path is not None else None,
                column="intervention_cost",
                message=(
                    f"intervention cost {report.intervention_cost:g} exceeds budget "
                    f"{report.budget:g} by {report.excess:g}"
                ),
            )
        ]
    )


def evaluate_manifest(manifest: RunManifest, workers: int | None = None) -> ModeRun:
    """Load the manifest's inputs, apply its scenario and compute the indicator.

    Raises:
        TwinValidationError: invalid input files or cross-file references
        BudgetViolationError: scenario cost exceeds its budget
        TwinIOError: unreadable input
    """
    if manifest.replay_totals is not None:
        result = load_totals_replay(manifest.replay_totals, label=manifest.label)
        return ModeRun(manifest=manifest, result=result)

    model = load_enterprise_model(manifest.model, label=manifest.label)
    series: EnterpriseModel = model
    scenario = None
    budget = None
    if manifest.competencies is not None:
        matrix = load_competency_matrix(manifest.competencies, model)
        if manifest.scenario is not None:
            scenario = load_scenario(manifest.scenario)
            problems = check_scenario_references(scenario, matrix, model, manifest.scenario)
            if problems:
                raise TwinValidationError(problems)
            budget = check_budget(scenario)
            if not budget.passed:
                raise budget_violation(budget, manifest.scenario)
            series = apply_scenario(model, matrix, scenario)

    result = run_indicator(series, manifest.window_config(), workers=workers, label=manifest.label)
    return ModeRun(
        manifest=manifest,
        result=result,
        series=series,
        scenario=scenario,
        budget=budget,
        base_expense=total_expense(model),
    )


def compare_manifests(
    baseline: RunManifest, intervention: RunManifest, workers: int | None = None
) -> tuple[ModeRun, ModeRun, ModeComparison]:
    """Evaluate both modes and compare them; the intervention's budget check is reported."""
    baseline_run = evaluate_manifest(baseline, workers)
    intervention_run = evaluate_manifest(intervention, workers)
    comparison = compare_modes(
        baseline_run.result, intervention_run.result, budget=intervention_run.budget
    )
    return baseline_run, intervention_run, comparison
