"""Enterprise model domain types.

An enterprise is the system S = {T, X}: n process indicator series x^j(t)
over periods t = 1..T_max, in thousand rubles per period. Arrays are copied
on construction and made read-only, so instances are safe to share.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from app.core.errors import TwinValidationError


def _frozen_array(data: object, dtype: type) -> np.ndarray:
    array = np.array(data, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _check_ids(ids: tuple[str, ...], kind: str) -> None:
    seen: set[str] = set()
    for idx, value in enumerate(ids, start=1):
        if not value:
            raise TwinValidationError(f"empty {kind} id at position {idx}")
        if value in seen:
            raise TwinValidationError(f"duplicate {kind} id '{value}'")
        seen.add(value)


@dataclass(frozen=True, eq=False)
class EnterpriseModel:
    """Process indicator matrix X with T_max rows and n columns.

    ``history`` holds optional pre-history rows for periods 1-H..0. They feed
    lag windows only and are not part of the model's periods.
    """

    process_ids: tuple[str, ...]
    values: np.ndarray
    label: str = "basic_mode"
    history: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "process_ids", tuple(self.process_ids))
        n = len(self.process_ids)
        if n < 1:
            raise TwinValidationError("model needs at least one process")
        _check_ids(self.process_ids, "process")

        values = _frozen_array(self.values, np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] != n:
            raise TwinValidationError(
                f"values must be a T_max x {n} matrix with T_max >= 1, got shape {values.shape}"
            )
        if not np.isfinite(values).all():
            raise TwinValidationError("values contain NaN or infinity")
        object.__setattr__(self, "values", values)

        history = np.empty((0, n)) if self.history is None else self.history
        history = _frozen_array(history, np.float64)
        if history.ndim != 2 or history.shape[1] != n:
            raise TwinValidationError(f"history must have {n} columns, got shape {history.shape}")
        if not np.isfinite(history).all():
            raise TwinValidationError("history contains NaN or infinity")
        object.__setattr__(self, "history", history)

    @property
    def periods(self) -> int:
        """T_max."""
        return int(self.values.shape[0])

    @property
    def n(self) -> int:
        return len(self.process_ids)

    @property
    def history_length(self) -> int:
        return 0 if self.history is None else int(self.history.shape[0])

    @property
    def first_period(self) -> int:
        """Earliest period present, including pre-history."""
        return 1 - self.history_length

    @cached_property
    def lag_source(self) -> np.ndarray:
        """History and values stacked; row r holds period ``first_period + r``."""
        if self.history is None:
            return self.values
        stacked = np.vstack([self.history, self.values])
        stacked.setflags(write=False)
        return stacked


@dataclass(frozen=True, eq=False)
class ControlledSeries(EnterpriseModel):
    """The n process series v^j(t) under a scenario.

    Equal to the base model for every t < activation_period.
    """

    activation_period: int | None = None
    applied_delta: float = 0.0

    @classmethod
    def from_model(cls, model: EnterpriseModel) -> "ControlledSeries":
        """Null scenario: the base series unchanged."""
        return cls(
            process_ids=model.process_ids,
            values=model.values,
            label=model.label,
            history=model.history,
        )


@dataclass(frozen=True, eq=False)
class CompetencyMatrix:
    """Binary m x n mapping v_i^j of competencies to processes (1-yes, 0-no)."""

    competency_ids: tuple[str, ...]
    process_ids: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "competency_ids", tuple(self.competency_ids))
        object.__setattr__(self, "process_ids", tuple(self.process_ids))
        _check_ids(self.competency_ids, "competency")
        _check_ids(self.process_ids, "process")

        raw = np.asarray(self.entries)
        shape = (len(self.competency_ids), len(self.process_ids))
        if raw.shape != shape:
            raise TwinValidationError(f"entries must have shape {shape}, got {raw.shape}")
        if not np.isin(raw, (0, 1)).all():
            i, j = np.argwhere(~np.isin(raw, (0, 1)))[0]
            raise TwinValidationError(f"non-binary entry at ({i + 1},{j + 1})")
        object.__setattr__(self, "entries", _frozen_array(raw, np.int8))

    @property
    def m(self) -> int:
        return len(self.competency_ids)

    def coverage(self, competency_id: str) -> np.ndarray:
        """Boolean mask of the processes the competency applies to."""
        return self.entries[self.competency_ids.index(competency_id)] == 1

    def matches(self, model: EnterpriseModel) -> bool:
        """Same process ids in the same order."""
        return self.process_ids == model.process_ids
