"""Pytest configuration and fixtures."""

from pathlib import Path

import pytest

from app.core.config import settings
from app.models.enterprise import EnterpriseModel
from app.models.schemas import SynthSpec, WarmupPolicy, WindowConfig
from app.services.synth import generate

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory of the sample input files."""
    return FIXTURES


@pytest.fixture
def synth_model():
    """Factory for seeded synthetic models."""

    def make(seed: int = 42, n: int = 5, periods: int = 100, **kwargs) -> EnterpriseModel:
        return generate(SynthSpec(seed=seed, n=n, T_max=periods, **kwargs))

    return make


@pytest.fixture
def default_window() -> WindowConfig:
    return WindowConfig(k=12, min_lags=2, warmup_policy=WarmupPolicy.GROWING_WINDOW)


@pytest.fixture(autouse=True)
def reset_settings(monkeypatch):
    """Keep settings changes local to a test."""
    monkeypatch.setattr(settings, "metrics_file", "")
    monkeypatch.setattr(settings, "workers", 1)
