"""
tests/test_config.py
====================
Environment-driven settings.
"""

from pathlib import Path

import pytest
from pydantic import ValidationError

from config import get_settings

VARIABLES = ["KURAMOTO_SEED", "KURAMOTO_WORKERS", "KURAMOTO_SAMPLES", "KURAMOTO_FULL_SAMPLES", "KURAMOTO_OUTPUT_DIR"]


@pytest.fixture(autouse=True)
def _clean_environment(monkeypatch):
    for name in VARIABLES:
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    settings = get_settings()
    assert settings.seed == 0
    assert settings.workers >= 1
    assert settings.samples == 100_000
    assert settings.full_samples == 1_000_000
    assert settings.output_dir == Path("data/figures")


def test_values_from_environment(monkeypatch):
    monkeypatch.setenv("KURAMOTO_SEED", "42")
    monkeypatch.setenv("KURAMOTO_WORKERS", "3")
    monkeypatch.setenv("KURAMOTO_SAMPLES", " 5000 ")
    monkeypatch.setenv("KURAMOTO_OUTPUT_DIR", "/tmp/figures")
    settings = get_settings()
    assert (settings.seed, settings.workers, settings.samples) == (42, 3, 5000)
    assert settings.output_dir == Path("/tmp/figures")


def test_blank_values_fall_back_to_defaults(monkeypatch):
    monkeypatch.setenv("KURAMOTO_SEED", "  ")
    assert get_settings().seed == 0


def test_bad_values_name_the_variable(monkeypatch):
    monkeypatch.setenv("KURAMOTO_SAMPLES", "lots")
    with pytest.raises(ValueError, match="KURAMOTO_SAMPLES"):
        get_settings()


def test_worker_count_must_be_positive(monkeypatch):
    monkeypatch.setenv("KURAMOTO_WORKERS", "0")
    with pytest.raises(ValueError, match="KURAMOTO_WORKERS"):
        get_settings()


def test_sample_count_is_validated(monkeypatch):
    monkeypatch.setenv("KURAMOTO_FULL_SAMPLES", "0")
    with pytest.raises(ValidationError):
        get_settings()
