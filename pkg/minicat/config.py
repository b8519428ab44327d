"""Run configuration.

`BuildConfig` holds the knobs that shape the network and its tiles; `RunConfig` adds what a pipeline
run needs on top (threshold sweep, seed, workers, paths). A config file is a flat YAML mapping keyed
by field names. Values resolve as defaults < config file < command-line flags.
"""

from __future__ import annotations

import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import yaml
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, PositiveInt, ValidationError

from minicat.core.exceptions import ConfigError

__all__ = (
    "ECHO_EXCLUDE",
    "BuildConfig",
    "RunConfig",
    "load_config_file",
    "resolve_config",
)

ECHO_EXCLUDE = frozenset({"workers", "out_dir", "products", "sales"})
"""Fields that do not change any result and stay out of the report"""


def _default_workers() -> int:
    return os.cpu_count() or 1


class BuildConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    threshold_n: PositiveInt = Field(default=5, validation_alias=AliasChoices("threshold_n", "threshold_N"))
    """Minimum togetherness count of an edge"""
    staple_percent: float = Field(default=0.05, ge=0.0, le=1.0)
    """Share of the GCC removed as staples"""
    min_component: PositiveInt = 5
    window_days: PositiveInt = 7
    cpm_k: int = Field(default=3, ge=3)
    min_gain: PositiveInt = 1
    min_tile: PositiveInt = 5
    dedup_per_customer: bool = False


class RunConfig(BuildConfig):
    n_sweep: tuple[PositiveInt, ...] = (1, 5, 10, 20)
    """Extra thresholds for the network statistics table"""
    seed: int = Field(default=0, ge=0, lt=2**64)
    workers: PositiveInt = Field(default_factory=_default_workers)
    top_staples: PositiveInt = 20
    products: Path | None = None
    sales: Path | None = None
    out_dir: Path = Path("out")

    @property
    def thresholds(self) -> list[int]:
        """Sorted sweep thresholds, the configured `threshold_n` included"""
        return sorted({*self.n_sweep, self.threshold_n})

    def echo(self) -> dict[str, Any]:
        """Resolved settings that determine the results, in field order"""
        return self.model_dump(mode="json", exclude=set(ECHO_EXCLUDE))


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a flat YAML config

    Args:
        path (str | Path): config file

    Raises:
        ConfigError: if the file cannot be read, is not valid YAML, or is not a flat mapping

    Returns:
        dict[str, Any]: raw settings
    """
    try:
        with Path(path).open() as file:
            data = yaml.safe_load(file)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must be a mapping of field names to values")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"Config {path} must be flat, {key} holds a mapping")
    return data


def resolve_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    model: type[RunConfig] = RunConfig,
) -> RunConfig:
    """Merge defaults, a config file and flag overrides

    Args:
        path (str | Path | None, optional): config file. Defaults to None.
        overrides (Mapping[str, Any] | None, optional): flag values; None values are ignored.
            Defaults to None.
        model (type[RunConfig], optional): config class. Defaults to RunConfig.

    Raises:
        ConfigError: on unknown keys or out-of-range values

    Returns:
        RunConfig: resolved configuration
    """
    settings: dict[str, Any] = load_config_file(path) if path is not None else {}
    if "threshold_N" in settings:
        settings["threshold_n"] = settings.pop("threshold_N")
    settings.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return model.model_validate(settings)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}" for error in exc.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}") from exc
