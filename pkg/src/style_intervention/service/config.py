"""Run configuration: defaults, JSON config files and command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from style_intervention.domain.directions import SOLVERS, SPACES, TrainingParams
from style_intervention.domain.intervene import DEFAULT_BETA, LossWeights, Schedule
from style_intervention.domain.stylegen.weights import BACKENDS
from style_intervention.service.storage import read_json


class ConfigError(ValueError):
    """Exception raised for unknown keys or invalid values in a configuration.

    Attributes:
        key: Dotted name of the offending key, if known.
    """

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(message)


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a pipeline run. All fields have defaults."""

    seed: int = 7
    backend: str = "random"
    arch: dict[str, Any] | None = None
    dataset_size: int = 2000
    attribute: str = "red_top_left"
    space: str = "S"
    l1_lambda: float = 0.05
    hinge_c: float = 1.0
    epochs: int = 200
    solver: str = "lp"
    refit: bool = True
    beta: float = DEFAULT_BETA
    loss_weights: LossWeights = field(default_factory=LossWeights)
    schedule: Schedule = field(default_factory=Schedule)
    fraction: float = 0.05
    jobs: int = 1
    output: str | None = None

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}", "backend")
        if self.space not in SPACES:
            raise ConfigError(f"space must be one of {SPACES}", "space")
        if self.dataset_size < 0:
            raise ConfigError("dataset_size must be >= 0", "dataset_size")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1", "jobs")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}", "solver")
        if not 0.0 < self.fraction < 1.0:
            raise ConfigError("fraction must be in (0, 1)", "fraction")

    def training_params(self) -> TrainingParams:
        return TrainingParams(
            l1_lambda=self.l1_lambda,
            hinge_c=self.hinge_c,
            epochs=self.epochs,
            seed=self.seed,
            solver=self.solver,
            refit=self.refit,
        )

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_NESTED = {"loss_weights": LossWeights, "schedule": Schedule}


def _field_names(cls: type) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def build_config(values: dict[str, Any]) -> RunConfig:
    """Construct a RunConfig from a plain (possibly partial) mapping.

    Raises:
        ConfigError: On unknown keys or invalid values.
    """
    known = _field_names(RunConfig)
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown config key: {key}", key)
    kwargs = dict(values)
    for key, cls in _NESTED.items():
        if key in kwargs:
            nested = kwargs[key]
            if not isinstance(nested, dict):
                raise ConfigError(f"{key} must be an object", key)
            for sub in nested:
                if sub not in _field_names(cls):
                    raise ConfigError(f"unknown config key: {key}.{sub}", f"{key}.{sub}")
            try:
                kwargs[key] = cls(**nested)
            except ValueError as e:
                raise ConfigError(str(e), key) from e
    try:
        return RunConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def load_config_file(path: str | Path) -> dict[str, Any]:
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config file must contain a JSON object")
    return data


def resolve_config(
    config_file: str | Path | None = None, overrides: dict[str, Any] | None = None
) -> RunConfig:
    """Apply defaults < config file < explicit overrides.

    Args:
        config_file: Optional JSON file with RunConfig keys (nested objects
            for loss_weights and schedule).
        overrides: Values given on the command line, in the same nested
            shape. Entries whose value is None are treated as not given.
    """
    values = load_config_file(config_file) if config_file else {}
    given = {}
    for key, value in (overrides or {}).items():
        if isinstance(value, dict):
            value = {k: v for k, v in value.items() if v is not None}
            if not value:
                continue
        elif value is None:
            continue
        given[key] = value
    return build_config(_merge(values, given))
