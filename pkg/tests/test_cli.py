"""End-to-end tests for the twinsight command line."""

import json
import shutil
from pathlib import Path

import pytest
from typer.testing import CliRunner

from app import __version__
from app.core.config import settings
from app.main import app
from app.models.schemas import WindowConfig
from app.services.indicator import run_indicator
from app.services.ingest import load_enterprise_model
from app.services.scenario import compare_modes

runner = CliRunner()

SAMPLES = Path(__file__).parent.parent / "scenarios"

REPORT_FILES = ("indicator.csv", "totals.csv", "dynamics.csv", "summary.json")


def invoke(*args):
    return runner.invoke(app, [str(arg) for arg in args])


def json_line(output: str) -> dict:
    """First stdout line holding a JSON document."""
    return json.loads(next(line for line in output.splitlines() if line.startswith("{")))


def write_synth_model(tmp_path, name: str, seed: int, n: int = 4, periods: int = 60):
    spec = tmp_path / f"{name}.yaml"
    spec.write_text(f"seed: {seed}\nn: {n}\nT_max: {periods}\ndriver_weight: 0.5\n")
    target = tmp_path / f"{name}.csv"
    result = invoke("synth", "--spec", spec, "--output", target)
    assert result.exit_code == 0, result.output
    return target


class TestRunCommand:
    """Tests for `twinsight run`."""

    def test_replay_of_published_totals(self, fixtures_dir, tmp_path):
        """Should replay the published per-period totals into reports."""
        result = invoke(
            "run",
            "--replay-totals", fixtures_dir / "sfu_totals.csv",
            "--label", "SFU",
            "--out-dir", tmp_path,
        )

        assert result.exit_code == 0, result.output
        totals = (tmp_path / "totals.csv").read_text().splitlines()
        assert totals[0] == "mode,t,total"
        assert totals[-1] == "SFU,Total,5491.33"
        assert len(totals) == 59
        assert not (tmp_path / "indicator.csv").exists()
        assert "SFU: V=5491.33" in result.output

    def test_baseline_without_scenario(self, fixtures_dir, tmp_path):
        """Should compute a baseline mode without a scenario."""
        result = invoke(
            "run", "--model", fixtures_dir / "small_model.csv", "--window", 3, "--out-dir", tmp_path
        )

        assert result.exit_code == 0, result.output
        for name in REPORT_FILES:
            assert (tmp_path / name).exists()
        indicator = (tmp_path / "indicator.csv").read_text().splitlines()
        assert indicator[0] == "mode,t,process,V_i"
        assert indicator[1] == "basic_mode,1,purchasing,0"
        assert len(indicator) == 1 + 6 * 3
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["mode"] == "basic_mode"
        assert summary["k"] == 3
        assert summary["policy"] == "growing_window"
        assert "projected expense" not in result.output

    def test_scenario_projects_expense(self, fixtures_dir, tmp_path):
        """Should report the projected expense of a scenario run."""
        result = invoke(
            "run",
            "--model", fixtures_dir / "small_model.csv",
            "--competencies", fixtures_dir / "small_competencies.csv",
            "--scenario", fixtures_dir / "small_scenario.yaml",
            "--window", 3,
            "--out-dir", tmp_path,
        )

        assert result.exit_code == 0, result.output
        assert "intervention: V=" in result.output
        assert "projected expense: 3788.7" in result.output

    def test_format_json_only(self, fixtures_dir, tmp_path):
        """Should write only the JSON summary with --format json."""
        result = invoke(
            "run",
            "--model", fixtures_dir / "small_model.csv",
            "--window", 3,
            "--format", "json",
            "--out-dir", tmp_path,
        )

        assert result.exit_code == 0, result.output
        assert sorted(p.name for p in tmp_path.iterdir()) == ["summary.json"]

    def test_reports_byte_identical_across_runs_and_workers(self, fixtures_dir, tmp_path):
        """Should write byte-identical reports across runs and worker counts."""
        model = tmp_path / "seed42.csv"
        assert invoke("synth", "--spec", fixtures_dir / "synth_seed42.yaml", "-o", model).exit_code == 0

        outputs = []
        for attempt, workers in enumerate([1, 4, 1]):
            out_dir = tmp_path / f"run{attempt}"
            result = invoke("run", "--model", model, "--workers", workers, "--out-dir", out_dir)
            assert result.exit_code == 0, result.output
            outputs.append({name: (out_dir / name).read_bytes() for name in REPORT_FILES})

        assert outputs[0] == outputs[1] == outputs[2]

    def test_skip_policy(self, fixtures_dir, tmp_path):
        """Should zero the warm-up periods under --warmup skip."""
        result = invoke(
            "run",
            "--model", fixtures_dir / "small_model.csv",
            "--window", 3,
            "--warmup", "skip",
            "--out-dir", tmp_path,
        )

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["policy"] == "skip"
        # Periods 1..3 lack three lags: every process flagged
        assert summary["degenerate_count"] >= 9


class TestCompareCommand:
    """Tests for `twinsight compare`."""

    def test_published_delta(self, fixtures_dir, tmp_path):
        """Should reproduce the published delta between the two replayed modes."""
        result = invoke(
            "compare",
            "--baseline", fixtures_dir / "basic_total.yaml",
            "--intervention", fixtures_dir / "sfu.yaml",
            "--out-dir", tmp_path,
        )

        assert result.exit_code == 0, result.output
        assert "delta_v=421.4 budget=none" in result.output
        report = json.loads((tmp_path / "comparison.json").read_text())
        assert report["delta_v"] == pytest.approx(421.40, abs=1e-9)
        assert report["cost_delta"] is None
        assert (tmp_path / "deltas.csv").read_text() == "t,baseline,intervention,delta\n"

    def test_mode_against_itself(self, fixtures_dir, tmp_path):
        """Should report a zero delta for a mode compared with itself."""
        manifest = fixtures_dir / "baseline.yaml"

        result = invoke("compare", "--baseline", manifest, "--intervention", manifest, "--out-dir", tmp_path)

        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "comparison.json").read_text())
        assert report["delta_v"] == 0
        deltas = (tmp_path / "deltas.csv").read_text().splitlines()[1:]
        assert len(deltas) == 6
        assert all(line.endswith(",0") for line in deltas)

    def test_scenario_intervention(self, fixtures_dir, tmp_path):
        """Should compare a baseline against its scenario intervention."""
        result = invoke(
            "compare",
            "--baseline", fixtures_dir / "baseline.yaml",
            "--intervention", fixtures_dir / "intervention.yaml",
            "--out-dir", tmp_path,
        )

        assert result.exit_code == 0, result.output
        assert "budget=pass" in result.output
        report = json.loads((tmp_path / "comparison.json").read_text())
        assert report["cost_delta"] == pytest.approx(107.7, abs=1e-9)
        assert report["budget_status"] == "pass"

    def test_synthetic_pair_matches_engine(self, tmp_path):
        """Should match the engine's delta for two synthetic models."""
        first = write_synth_model(tmp_path, "first", seed=7)
        second = write_synth_model(tmp_path, "second", seed=8)
        for name, model in (("a", first), ("b", second)):
            (tmp_path / f"{name}.yaml").write_text(f"model: {model.name}\nwindow: 6\n")

        result = invoke(
            "compare",
            "--baseline", tmp_path / "a.yaml",
            "--intervention", tmp_path / "b.yaml",
            "--format", "json",
            "--out-dir", tmp_path / "out",
        )

        assert result.exit_code == 0, result.output
        cfg = WindowConfig(k=6)
        expected = compare_modes(
            run_indicator(load_enterprise_model(first), cfg),
            run_indicator(load_enterprise_model(second), cfg),
        )
        report = json.loads((tmp_path / "out" / "comparison.json").read_text())
        assert report["delta_v"] == expected.delta_v


class TestSynthCommand:
    """Tests for `twinsight synth`."""

    def test_writes_model(self, tmp_path):
        """Should write a model CSV of the requested shape."""
        target = write_synth_model(tmp_path, "small", seed=3, n=3, periods=10)

        lines = target.read_text().splitlines()
        assert lines[0] == "period,x1,x2,x3"
        assert len(lines) == 11
        assert lines[1].startswith("1,")

    def test_idempotent(self, fixtures_dir, tmp_path):
        """Should write the same bytes on every invocation."""
        spec = fixtures_dir / "synth_seed42.yaml"
        invoke("synth", "--spec", spec, "-o", tmp_path / "a.csv")
        invoke("synth", "--spec", spec, "-o", tmp_path / "b.csv")

        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_zero_noise_is_constant(self, tmp_path):
        """Should produce constant series when the noise scale is zero."""
        spec = tmp_path / "flat.yaml"
        spec.write_text("seed: 1\nn: 2\nT_max: 5\nbase_level: 250\nnoise_scale: 0\n")

        result = invoke("synth", "--spec", spec, "-o", tmp_path / "flat.csv")

        assert result.exit_code == 0, result.output
        rows = (tmp_path / "flat.csv").read_text().splitlines()[1:]
        assert rows == [f"{t},250,250" for t in range(1, 6)]

    def test_invalid_spec(self, tmp_path):
        """Should reject an invalid spec with exit 1."""
        spec = tmp_path / "bad.yaml"
        spec.write_text("seed: 1\nn: 0\nT_max: 5\n")

        result = invoke("synth", "--spec", spec, "-o", tmp_path / "out.csv")

        assert result.exit_code == 1
        assert "error:" in result.output
        assert not (tmp_path / "out.csv").exists()


class TestValidateCommand:
    """Tests for `twinsight validate`."""

    def test_consistent_inputs(self, fixtures_dir):
        """Should pass a consistent model, matrix and scenario."""
        result = invoke(
            "validate",
            fixtures_dir / "small_model.csv",
            fixtures_dir / "small_competencies.csv",
            fixtures_dir / "small_scenario.yaml",
        )

        assert result.exit_code == 0, result.output
        assert "(model)" in result.output
        assert "(competencies)" in result.output
        assert "(scenario)" in result.output

    def test_manifests_and_totals(self, fixtures_dir):
        """Should accept manifests and totals files."""
        result = invoke(
            "validate",
            fixtures_dir / "intervention.yaml",
            fixtures_dir / "sfu_totals.csv",
            fixtures_dir / "synth_seed42.yaml",
        )

        assert result.exit_code == 0, result.output
        assert "(manifest)" in result.output
        assert "(totals)" in result.output
        assert "(synth)" in result.output

    def test_non_binary_entry_located(self, tmp_path):
        """Should locate a non-binary matrix entry."""
        matrix = tmp_path / "matrix.csv"
        matrix.write_text("competency,a,b\nk1,1,0\nk2,0,2\n")

        result = invoke("validate", matrix)

        assert result.exit_code == 1
        assert f"{matrix}:3:b: non-binary entry at (2,2): '2'" in result.output

    def test_unknown_competency_located(self, fixtures_dir, tmp_path):
        """Should locate a scenario reference to an unknown competency."""
        scenario = tmp_path / "scenario.yaml"
        scenario.write_text("activation_period: 2\nbudget: 10\neffect.marketing.add: 1\n")

        result = invoke(
            "validate",
            fixtures_dir / "small_model.csv",
            fixtures_dir / "small_competencies.csv",
            scenario,
        )

        assert result.exit_code == 1
        assert f"{scenario}:3:effect.marketing: unknown competency 'marketing'" in result.output

    def test_unrecognized_file(self, tmp_path):
        """Should fail on a file of unrecognized kind."""
        notes = tmp_path / "notes.csv"
        notes.write_text("date,amount\n2024-01-01,5\n")

        result = invoke("validate", notes)

        assert result.exit_code == 1
        assert "unrecognized file kind" in result.output


class TestExitCodes:
    """Tests for error reporting and exit statuses."""

    def test_validation_error(self, tmp_path):
        """Should exit 1 with a located diagnostic for bad input."""
        model = tmp_path / "model.csv"
        model.write_text("period,a\n1,1\n2,x\n")

        result = invoke("run", "--model", model, "--out-dir", tmp_path / "out")

        assert result.exit_code == 1
        assert f"error: {model}:3:a:" in result.output

    def test_budget_violation(self, fixtures_dir, tmp_path):
        """Should exit 2 and write nothing when the budget is exceeded."""
        for name in ("small_model.csv", "small_competencies.csv"):
            shutil.copy(fixtures_dir / name, tmp_path / name)
        scenario = tmp_path / "expensive.yaml"
        scenario.write_text("activation_period: 4\nbudget: 1000\nintervention_cost: 1500\n")

        result = invoke(
            "run",
            "--model", tmp_path / "small_model.csv",
            "--competencies", tmp_path / "small_competencies.csv",
            "--scenario", scenario,
            "--window", 3,
            "--out-dir", tmp_path / "out",
        )

        assert result.exit_code == 2
        assert "intervention cost 1500 exceeds budget 1000 by 500" in result.output
        assert not (tmp_path / "out").exists()

    def test_unwritable_output(self, fixtures_dir, tmp_path):
        """Should exit 3 when the output directory cannot be created."""
        blocker = tmp_path / "occupied"
        blocker.write_text("not a directory")

        result = invoke(
            "run", "--model", fixtures_dir / "small_model.csv", "--window", 3, "--out-dir", blocker
        )

        assert result.exit_code == 3

    def test_invalid_warmup_is_validation_error(self, fixtures_dir, tmp_path):
        """Should exit 1, not click's 2, for an unknown --warmup value."""
        result = invoke(
            "run",
            "--model", fixtures_dir / "small_model.csv",
            "--warmup", "sideways",
            "--out-dir", tmp_path,
        )

        assert result.exit_code == 1
        assert "sideways" in result.output

    @pytest.mark.parametrize(
        "args",
        [
            ("run", "--model", "m.csv", "--workers", "0"),
            ("run", "--model", "m.csv", "--window", "abc"),
            ("run", "--no-such-option"),
            ("synth",),
            ("no-such-command",),
        ],
    )
    def test_usage_errors_are_validation_errors(self, args):
        """Should map every argument error to exit 1."""
        result = invoke(*args)

        assert result.exit_code == 1

    def test_window_mismatch(self, fixtures_dir, tmp_path):
        """Should exit 4 when the two modes use different windows."""
        other = tmp_path / "wider.yaml"
        other.write_text(f"model: {fixtures_dir / 'small_model.csv'}\nwindow: 4\n")

        result = invoke(
            "compare",
            "--baseline", fixtures_dir / "baseline.yaml",
            "--intervention", other,
            "--out-dir", tmp_path / "out",
        )

        assert result.exit_code == 4
        assert "window configurations differ" in result.output

    def test_missing_input_is_validation_error(self, tmp_path):
        """Should treat a missing input file as a validation error."""
        result = invoke("run", "--model", tmp_path / "absent.csv", "--out-dir", tmp_path / "out")

        assert result.exit_code == 1
        assert "model file does not exist" in result.output

    def test_error_json(self, fixtures_dir, tmp_path):
        """Should print an ErrorResponse document with --error-json."""
        other = tmp_path / "wider.yaml"
        other.write_text(f"model: {fixtures_dir / 'small_model.csv'}\nwindow: 4\n")

        result = invoke(
            "compare",
            "--baseline", fixtures_dir / "baseline.yaml",
            "--intervention", other,
            "--error-json",
        )

        document = json_line(result.output)
        assert document["code"] == "shape_mismatch"
        assert document["exit_code"] == 4
        assert document["diagnostics"]


class TestAppOptions:
    """Tests for global options and ambient outputs."""

    def test_version(self):
        """Should print the version and exit 0."""
        result = invoke("--version")

        assert result.exit_code == 0
        assert result.output.strip() == f"twinsight {__version__}"

    def test_no_arguments_shows_help(self):
        """Should list the subcommands when called bare."""
        result = runner.invoke(app, [])

        assert "run" in result.output
        assert "compare" in result.output

    def test_metrics_textfile(self, fixtures_dir, tmp_path, monkeypatch):
        """Should export command metrics to the configured textfile."""
        metrics = tmp_path / "twinsight.prom"
        monkeypatch.setattr(settings, "metrics_file", str(metrics))

        result = invoke(
            "run", "--model", fixtures_dir / "small_model.csv", "--window", 3, "--out-dir", tmp_path
        )

        assert result.exit_code == 0, result.output
        text = metrics.read_text()
        assert "twinsight_command_duration_seconds" in text
        assert "twinsight_windows_evaluated_total" in text


class TestSampleScenarios:
    """The shipped samples work end to end."""

    def test_sample_comparison(self, tmp_path):
        """Should compare the shipped sample modes end to end."""
        samples = tmp_path / "scenarios"
        shutil.copytree(SAMPLES, samples)
        synth = invoke("synth", "--spec", samples / "synth_two_groups.yaml", "-o", samples / "synthetic.csv")
        assert synth.exit_code == 0, synth.output

        result = invoke(
            "compare",
            "--baseline", samples / "basic_mode.yaml",
            "--intervention", samples / "process_engineer_mode.yaml",
            "--out-dir", tmp_path / "out",
        )

        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "out" / "comparison.json").read_text())
        assert report["budget_status"] == "pass"
        assert len((tmp_path / "out" / "deltas.csv").read_text().splitlines()) == 121
