"""Process-wide settings for the bench CLI.

Read once from FASTDIS_* environment variables on first use; command-line
flags override them. Library functions never consult these settings, they
take explicit arguments and generators.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

ENV_PREFIX = "FASTDIS_"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    log_level: str = "WARNING"
    output_format: Literal["csv", "json"] = "csv"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.strip().upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level {value!r}")
        return level

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> Settings:
        environ = os.environ if environ is None else environ
        fields = {"seed": "SEED", "workers": "WORKERS", "log_level": "LOG_LEVEL", "output_format": "FORMAT"}
        values = {
            name: environ[ENV_PREFIX + key]
            for name, key in fields.items()
            if environ.get(ENV_PREFIX + key)
        }
        return cls.model_validate(values)


_settings: Settings | None = None


def get_settings() -> Settings:
    """Return the process-wide Settings, reading the environment on first use."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def reset_settings() -> None:
    """Drop the cached settings (tests / changed environment)."""
    global _settings
    _settings = None
