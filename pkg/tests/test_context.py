"""Tests for the process-wide bench settings."""

import pytest
from pydantic import ValidationError

import fast_disentangle.context as ctx
from fast_disentangle.context import Settings


def test_defaults_without_environment():
    s = Settings.from_env({})
    assert (s.seed, s.workers, s.log_level, s.output_format) == (0, 1, "WARNING", "csv")


def test_reads_prefixed_variables():
    s = Settings.from_env(
        {
            "FASTDIS_SEED": "7",
            "FASTDIS_WORKERS": "3",
            "FASTDIS_LOG_LEVEL": " info ",
            "FASTDIS_FORMAT": "json",
            "SEED": "99",
        }
    )
    assert (s.seed, s.workers, s.log_level, s.output_format) == (7, 3, "INFO", "json")


def test_empty_values_fall_back_to_defaults():
    assert Settings.from_env({"FASTDIS_SEED": ""}).seed == 0


@pytest.mark.parametrize(
    "env",
    [
        {"FASTDIS_LOG_LEVEL": "chatty"},
        {"FASTDIS_SEED": "-1"},
        {"FASTDIS_WORKERS": "0"},
        {"FASTDIS_FORMAT": "xml"},
    ],
)
def test_rejects_bad_values(env):
    with pytest.raises(ValidationError):
        Settings.from_env(env)


def test_get_settings_is_singleton(monkeypatch):
    """get_settings() reads the environment once and caches the result."""
    monkeypatch.setenv("FASTDIS_SEED", "5")
    first = ctx.get_settings()
    monkeypatch.setenv("FASTDIS_SEED", "6")
    assert ctx.get_settings() is first
    assert first.seed == 5


def test_reset_settings_rereads_environment(monkeypatch):
    monkeypatch.setenv("FASTDIS_SEED", "5")
    first = ctx.get_settings()
    monkeypatch.setenv("FASTDIS_SEED", "6")
    ctx.reset_settings()
    second = ctx.get_settings()
    assert first is not second
    assert second.seed == 6
