"""Application configuration using pydantic-settings."""

from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings.

    All settings can be overridden via environment variables.
    """

    model_config = SettingsConfigDict(env_prefix="TWINSIGHT_")

    app_name: str = "twinsight"

    # Diagnostic verbosity (TWINSIGHT_LOG)
    log_level: str = Field(
        default="WARNING", validation_alias=AliasChoices("TWINSIGHT_LOG", "TWINSIGHT_LOG_LEVEL")
    )

    # Indicator engine defaults
    default_window: int = 12  # monthly periods, annual horizon
    default_min_lags: int = 2
    default_warmup: str = "growing_window"  # "growing_window" or "skip"
    workers: int = 1

    # Report formatting
    csv_significant_digits: int = 6

    # Scenario accounting (thousand rubles)
    cost_tolerance: float = 1.0

    # Allowed gap between a replay file's declared Total row and the sum of its periods
    replay_total_tolerance: float = 0.05

    # Prometheus textfile output, empty = disabled
    metrics_file: str = ""


# Global settings instance
settings = Settings()
