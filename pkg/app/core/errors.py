"""Error types shared by loaders, engines and the CLI.

Every error carries one or more located diagnostics and the process exit code
the CLI maps it to.
"""

from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError as PydanticValidationError

from app.models.schemas import Diagnostic


class TwinsightError(Exception):
    """Base error with located diagnostics."""

    exit_code: int = 1
    code: str = "error"

    def __init__(self, diagnostics: Iterable[Diagnostic] | str) -> None:
        if isinstance(diagnostics, str):
            diagnostics = [Diagnostic(message=diagnostics)]
        self.diagnostics: list[Diagnostic] = list(diagnostics)
        super().__init__(self.detail)

    @property
    def detail(self) -> str:
        """First diagnostic, rendered as a single line."""
        if not self.diagnostics:
            return self.code
        return self.diagnostics[0].render()


class TwinValidationError(TwinsightError):
    """Malformed input file or invalid parameter."""

    exit_code = 1
    code = "validation_error"


class BudgetViolationError(TwinsightError):
    """Scenario cost exceeds its budget, C(V) > C."""

    exit_code = 2
    code = "budget_violation"


class TwinIOError(TwinsightError):
    """File could not be read or written."""

    exit_code = 3
    code = "io_error"

    @classmethod
    def from_os_error(cls, exc: OSError, path: str | Path | None = None) -> "TwinIOError":
        target = path if path is not None else exc.filename
        return cls(
            [Diagnostic(path=str(target) if target else None, message=exc.strerror or str(exc))]
        )


class ShapeMismatchError(TwinsightError):
    """Two modes cannot be compared (periods, processes or window differ)."""

    exit_code = 4
    code = "shape_mismatch"


def diagnostics_from_pydantic(
    exc: PydanticValidationError,
    path: str | Path | None = None,
    lines: dict[str, int] | None = None,
) -> list[Diagnostic]:
    """Convert a pydantic ValidationError into located diagnostics.

    Args:
        exc: The pydantic error
        path: Source file, if any
        lines: Map of top-level key -> line number in the source file

    Returns:
        One diagnostic per pydantic error, formatted as ``loc: msg``
    """
    lines = lines or {}
    result = []
    for error in exc.errors():
        loc_items = [str(item) for item in error.get("loc", ())]
        loc = " -> ".join(loc_items)
        msg = error.get("msg", "Validation error")
        row = lines.get(loc_items[0]) if loc_items else None
        result.append(
            Diagnostic(
                path=str(path) if path is not None else None,
                row=row,
                column=loc or None,
                message=f"{loc}: {msg}" if loc else msg,
            )
        )
    return result
