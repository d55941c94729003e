"""Tests for the manifest evaluation pipeline."""

import pytest

from app.core.errors import BudgetViolationError, TwinValidationError
from app.models.results import ResultSource
from app.models.schemas import BudgetStatus, RunManifest
from app.services.ingest import load_manifest
from app.services.runner import compare_manifests, evaluate_manifest


class TestEvaluateManifest:
    """Tests for evaluate_manifest."""

    def test_baseline(self, fixtures_dir):
        """Should evaluate a baseline manifest."""
        mode = evaluate_manifest(load_manifest(fixtures_dir / "baseline.yaml"))

        assert mode.result.mode_label == "basic_mode"
        assert mode.result.window.k == 3
        assert mode.result.source == ResultSource.COMPUTED
        assert mode.scenario is None
        assert mode.projected_expense is None
        assert mode.base_expense == 3681

    def test_intervention(self, fixtures_dir):
        """Should apply the scenario of an intervention manifest."""
        mode = evaluate_manifest(load_manifest(fixtures_dir / "intervention.yaml"))

        assert mode.result.mode_label == "with_engineer"
        assert mode.budget.status == BudgetStatus.PASS
        assert mode.projected_expense == pytest.approx(3788.7)
        assert mode.series.applied_delta == pytest.approx(107.7)

    def test_replay(self, fixtures_dir):
        """Should replay totals named by a manifest."""
        mode = evaluate_manifest(load_manifest(fixtures_dir / "sfu.yaml"))

        assert mode.result.source == ResultSource.REPLAY
        assert mode.result.mode_label == "SFU"
        assert mode.series is None

    def test_budget_violation(self, fixtures_dir, tmp_path):
        """Should raise a located budget violation."""
        scenario = tmp_path / "over.yaml"
        scenario.write_text("activation_period: 2\nbudget: 100\nintervention_cost: 100.5\n")
        manifest = RunManifest(
            model=fixtures_dir / "small_model.csv",
            competencies=fixtures_dir / "small_competencies.csv",
            scenario=scenario,
            window=3,
        )

        with pytest.raises(BudgetViolationError) as exc_info:
            evaluate_manifest(manifest)

        assert exc_info.value.diagnostics[0].column == "intervention_cost"
        assert "exceeds budget 100 by 0.5" in exc_info.value.detail

    def test_activation_beyond_model(self, fixtures_dir, tmp_path):
        """Should reject an activation period beyond the model."""
        scenario = tmp_path / "late.yaml"
        scenario.write_text("activation_period: 9\nbudget: 100\n")
        manifest = RunManifest(
            model=fixtures_dir / "small_model.csv",
            competencies=fixtures_dir / "small_competencies.csv",
            scenario=scenario,
            window=3,
        )

        with pytest.raises(TwinValidationError) as exc_info:
            evaluate_manifest(manifest)

        assert "beyond T_max 6" in exc_info.value.detail


class TestCompareManifests:
    """Tests for compare_manifests."""

    def test_intervention_budget_reported(self, fixtures_dir):
        """Should report the intervention budget in the comparison."""
        _, intervention, comparison = compare_manifests(
            load_manifest(fixtures_dir / "baseline.yaml"),
            load_manifest(fixtures_dir / "intervention.yaml"),
        )

        assert comparison.budget_status == BudgetStatus.PASS
        assert comparison.delta_v == (
            intervention.result.grand_total - comparison.baseline.grand_total
        )

    def test_workers_do_not_change_results(self, fixtures_dir):
        """Should give the same delta for any worker count."""
        baseline = load_manifest(fixtures_dir / "baseline.yaml")
        intervention = load_manifest(fixtures_dir / "intervention.yaml")

        *_, serial = compare_manifests(baseline, intervention, workers=1)
        *_, threaded = compare_manifests(baseline, intervention, workers=3)

        assert serial.delta_v == threaded.delta_v
