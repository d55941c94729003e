from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

# Dedicated registry: the CLI exports it as a textfile, never over HTTP
REGISTRY = CollectorRegistry()

# Engine metrics
WINDOWS_EVALUATED_TOTAL = Counter(
    "twinsight_windows_evaluated_total",
    "Total number of period windows evaluated",
    ["policy"],
    registry=REGISTRY,
)

DEGENERATE_WINDOWS_TOTAL = Counter(
    "twinsight_degenerate_windows_total",
    "Total number of period windows that were insufficient or fully degenerate",
    ["policy"],
    registry=REGISTRY,
)

# Command metrics
COMMAND_DURATION_SECONDS = Histogram(
    "twinsight_command_duration_seconds",
    "CLI command duration in seconds",
    ["command"],
    registry=REGISTRY,
)


def export_metrics(path: str | Path) -> None:
    """Write the registry in Prometheus text format (textfile collector)."""
    write_to_textfile(str(path), REGISTRY)
