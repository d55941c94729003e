"""Input validation without computation (``twinsight validate``).

File kinds are detected from CSV headers and config keys. When a model,
a competency matrix and a scenario are validated together, cross-file
checks run as well.
"""

from dataclasses import dataclass, field
from app._compat import StrEnum
from pathlib import Path

from app.core.errors import TwinsightError, TwinValidationError
from app.core.logging import logger
from app.models.enterprise import CompetencyMatrix, EnterpriseModel
from app.models.schemas import Diagnostic, InterventionScenario, RunManifest
from app.services.ingest import (
    check_scenario_references,
    iter_config_keys,
    load_competency_matrix,
    load_enterprise_model,
    load_manifest,
    load_scenario,
    load_synth_spec,
    load_totals_replay,
    read_csv_header,
)

CSV_SUFFIXES = {".csv"}


class FileKind(StrEnum):
    MODEL = "model"
    COMPETENCIES = "competencies"
    TOTALS = "totals"
    SCENARIO = "scenario"
    SYNTH = "synth"
    MANIFEST = "manifest"
    UNKNOWN = "unknown"


@dataclass
class FileCheck:
    """Validation outcome of one file."""

    path: Path
    kind: FileKind = FileKind.UNKNOWN
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def lines(self) -> list[str]:
        if self.ok:
            return [f"ok {self.path} ({self.kind.value})"]
        return [diagnostic.render() for diagnostic in self.diagnostics]


def sniff_kind(path: Path) -> FileKind:
    """Detect the file kind from its CSV header or its config keys."""
    if path.suffix.lower() in CSV_SUFFIXES:
        header = read_csv_header(path)
        first = header[0] if header else ""
        return {
            "period": FileKind.MODEL,
            "competency": FileKind.COMPETENCIES,
            "t": FileKind.TOTALS,
        }.get(first, FileKind.UNKNOWN)

    keys = set(iter_config_keys(path))
    if "activation_period" in keys or any(key.startswith("effect.") for key in keys):
        return FileKind.SCENARIO
    if "seed" in keys:
        return FileKind.SYNTH
    if keys & {"model", "replay_totals"}:
        return FileKind.MANIFEST
    return FileKind.UNKNOWN


def _check_manifest_inputs(manifest: RunManifest) -> None:
    """Load everything a manifest references, with cross-file checks."""
    if manifest.replay_totals is not None:
        load_totals_replay(manifest.replay_totals)
        return
    model = load_enterprise_model(manifest.model)
    if manifest.competencies is None:
        return
    matrix = load_competency_matrix(manifest.competencies, model)
    if manifest.scenario is not None:
        problems = check_scenario_references(
            load_scenario(manifest.scenario), matrix, model, manifest.scenario
        )
        if problems:
            raise TwinValidationError(problems)


def validate_paths(paths: list[Path]) -> list[FileCheck]:
    """Validate every file and return one check per path, in argument order."""
    checks = [FileCheck(path=Path(path)) for path in paths]
    models: list[EnterpriseModel] = []
    matrices: list[tuple[FileCheck, CompetencyMatrix]] = []
    scenarios: list[tuple[FileCheck, InterventionScenario]] = []

    for check in checks:
        try:
            check.kind = sniff_kind(check.path)
            if check.kind == FileKind.MODEL:
                models.append(load_enterprise_model(check.path))
            elif check.kind == FileKind.COMPETENCIES:
                matrices.append((check, load_competency_matrix(check.path)))
            elif check.kind == FileKind.TOTALS:
                load_totals_replay(check.path)
            elif check.kind == FileKind.SCENARIO:
                scenarios.append((check, load_scenario(check.path)))
            elif check.kind == FileKind.SYNTH:
                load_synth_spec(check.path)
            elif check.kind == FileKind.MANIFEST:
                _check_manifest_inputs(load_manifest(check.path))
            else:
                check.diagnostics.append(
                    Diagnostic(path=str(check.path), message="unrecognized file kind")
                )
        except TwinsightError as exc:
            check.diagnostics.extend(exc.diagnostics)

    # Cross-file checks only when the pairing is unambiguous
    model = models[0] if len(models) == 1 else None
    if model is not None:
        for check, _ in matrices:
            try:
                load_competency_matrix(check.path, model)
            except TwinsightError as exc:
                check.diagnostics.extend(exc.diagnostics)
    if len(matrices) == 1 and matrices[0][0].ok:
        matrix = matrices[0][1]
        for check, scenario in scenarios:
            check.diagnostics.extend(check_scenario_references(scenario, matrix, model, check.path))
    elif scenarios:
        logger.debug("scenario reference checks skipped: matrices=%d", len(matrices))

    return checks
