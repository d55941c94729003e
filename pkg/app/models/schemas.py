"""Pydantic schemas for configuration files, manifests and report documents."""

from app._compat import StrEnum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from app.core.config import settings


class WarmupPolicy(StrEnum):
    """How periods with fewer than k lags are handled."""

    GROWING_WINDOW = "growing_window"  # use min(k, available) lags
    SKIP = "skip"  # insufficient periods are zero and flagged


class OutputFormat(StrEnum):
    """Report formats written by the CLI."""

    CSV = "csv"
    JSON = "json"
    BOTH = "both"

    @property
    def wants_csv(self) -> bool:
        return self in (OutputFormat.CSV, OutputFormat.BOTH)

    @property
    def wants_json(self) -> bool:
        return self in (OutputFormat.JSON, OutputFormat.BOTH)


class BudgetStatus(StrEnum):
    PASS = "pass"
    VIOLATION = "violation"
    NONE = "none"


class Diagnostic(BaseModel):
    """A located problem in an input file."""

    model_config = ConfigDict(frozen=True)

    path: str | None = Field(default=None, description="Source file")
    row: int | None = Field(default=None, ge=1, description="1-based line in the file")
    column: str | None = Field(default=None, description="Column name/index or config key")
    message: str = Field(..., description="Human-readable description")

    def render(self) -> str:
        """Render as ``path:row:column: message`` with missing parts omitted."""
        location = ":".join(
            str(part) for part in (self.path, self.row, self.column) if part is not None
        )
        return f"{location}: {self.message}" if location else self.message


class ErrorResponse(BaseModel):
    """Machine-readable error document (``--error-json``)."""

    detail: str = Field(..., description="Error description")
    code: str = Field(..., description="Error category")
    exit_code: int = Field(..., description="Process exit status")
    diagnostics: list[Diagnostic] = Field(default_factory=list)


class WindowConfig(BaseModel):
    """Sliding-window parameters of the indicator engine."""

    model_config = ConfigDict(frozen=True)

    k: int = Field(default=settings.default_window, ge=2, description="Window length in periods")
    min_lags: int = Field(default=settings.default_min_lags, ge=2, description="Minimum usable lags")
    warmup_policy: WarmupPolicy = Field(default=WarmupPolicy(settings.default_warmup))
    include_diagonal: bool = Field(
        default=True, description="Include the r_ii term in the row sum V_i(t)"
    )

    @model_validator(mode="after")
    def validate_lags(self) -> "WindowConfig":
        """Ensure 2 <= min_lags <= k."""
        if self.min_lags > self.k:
            raise ValueError(f"min_lags ({self.min_lags}) must not exceed k ({self.k})")
        return self


class Effect(BaseModel):
    """Per-competency effect on every process the competency covers."""

    model_config = ConfigDict(frozen=True)

    competency_id: str = Field(..., min_length=1)
    add: float = Field(default=0.0, allow_inf_nan=False, description="Thousand rubles per period")
    mul: float = Field(default=1.0, ge=0.0, allow_inf_nan=False, description="Dimensionless factor")


class InterventionScenario(BaseModel):
    """Competency intervention: what changes, from when, at what cost."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(default="intervention")
    activation_period: int = Field(..., ge=1, description="First affected period t0 (1-based)")
    effects: tuple[Effect, ...] = Field(default_factory=tuple)
    intervention_cost: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    budget: float = Field(..., ge=0.0, allow_inf_nan=False, description="Resource limit C")

    _key_lines: dict[str, int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def validate_unique_effects(self) -> "InterventionScenario":
        """Each competency contributes at most one effect."""
        seen: set[str] = set()
        for effect in self.effects:
            if effect.competency_id in seen:
                raise ValueError(f"duplicate effect for competency '{effect.competency_id}'")
            seen.add(effect.competency_id)
        return self

    @property
    def competency_ids(self) -> list[str]:
        return [effect.competency_id for effect in self.effects]

    def key_line(self, key: str) -> int | None:
        """Line of a key in the source file, if loaded from one."""
        return self._key_lines.get(key)

    def line_of(self, competency_id: str) -> int | None:
        """Line of the first key mentioning the competency."""
        for suffix in ("add", "mul"):
            line = self.key_line(f"effect.{competency_id}.{suffix}")
            if line is not None:
                return line
        return None

    def with_key_lines(self, lines: dict[str, int]) -> "InterventionScenario":
        self._key_lines = dict(lines)
        return self


class SynthSpec(BaseModel):
    """Parameters of a synthetic enterprise."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    seed: int = Field(..., ge=0, lt=2**64)
    n: int = Field(..., ge=1, description="Process count")
    periods: int = Field(..., ge=1, alias="T_max")
    base_level: float = Field(default=1000.0, allow_inf_nan=False)
    noise_scale: float = Field(default=100.0, ge=0.0, allow_inf_nan=False)
    driver_weight: float = Field(default=0.5, ge=0.0, le=1.0)
    correlation_groups: tuple[tuple[int, ...], ...] | None = Field(
        default=None, description="1-based process indices per group; default one group"
    )
    label: str | None = None

    @model_validator(mode="after")
    def validate_partition(self) -> "SynthSpec":
        """Groups must partition exactly the processes 1..n."""
        if self.correlation_groups is None:
            return self
        members = [j for group in self.correlation_groups for j in group]
        if any(not group for group in self.correlation_groups):
            raise ValueError("correlation groups must not be empty")
        if sorted(members) != list(range(1, self.n + 1)):
            raise ValueError(f"correlation groups must partition processes 1..{self.n} exactly")
        return self

    @property
    def groups(self) -> tuple[tuple[int, ...], ...]:
        """Groups as 0-based column indices."""
        if self.correlation_groups is None:
            return (tuple(range(self.n)),)
        return tuple(tuple(j - 1 for j in group) for group in self.correlation_groups)

    @property
    def process_ids(self) -> tuple[str, ...]:
        return tuple(f"x{j}" for j in range(1, self.n + 1))


class RunManifest(BaseModel):
    """Everything one mode evaluation needs."""

    model_config = ConfigDict(frozen=True)

    model: Path | None = None
    competencies: Path | None = None
    scenario: Path | None = None
    replay_totals: Path | None = None
    window: int = Field(default=settings.default_window, ge=2)
    min_lags: int = Field(default=settings.default_min_lags, ge=2)
    warmup: WarmupPolicy = Field(default=WarmupPolicy(settings.default_warmup))
    include_diagonal: bool = True
    out_dir: Path = Path("reports")
    formats: OutputFormat = OutputFormat.BOTH
    label: str = "basic_mode"

    @model_validator(mode="after")
    def validate_inputs(self) -> "RunManifest":
        """Exactly one data source; scenario needs competencies; paths exist."""
        if (self.model is None) == (self.replay_totals is None):
            raise ValueError("exactly one of 'model' or 'replay_totals' must be given")
        if self.scenario is not None and self.competencies is None:
            raise ValueError("a scenario requires a competency matrix")
        if self.replay_totals is not None and self.scenario is not None:
            raise ValueError("a scenario cannot be applied to replayed totals")
        if self.min_lags > self.window:
            raise ValueError(f"min_lags ({self.min_lags}) must not exceed window ({self.window})")
        for name in ("model", "competencies", "scenario", "replay_totals"):
            path = getattr(self, name)
            if path is not None and not path.exists():
                raise ValueError(f"{name} file does not exist: {path}")
        return self

    def window_config(self) -> WindowConfig:
        return WindowConfig(
            k=self.window,
            min_lags=self.min_lags,
            warmup_policy=self.warmup,
            include_diagonal=self.include_diagonal,
        )


class RunSummary(BaseModel):
    """One-line JSON summary of a mode evaluation."""

    mode: str
    grand_total: float
    degenerate_count: int
    k: int | None
    policy: str | None


class ComparisonReport(BaseModel):
    """Baseline-vs-intervention comparison document."""

    baseline_total: float
    intervention_total: float
    delta_v: float
    cost_delta: float | None
    budget_status: BudgetStatus
