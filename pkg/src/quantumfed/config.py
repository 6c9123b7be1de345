"""Experiment configuration: file schema, defaults and the sweep presets."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .data import DatasetSpec
from .protocol import FedConfig
from .qnn import Architecture

__all__ = [
    "ConfigError",
    "DataSection",
    "ExperimentConfig",
    "FederatedSection",
    "PRESETS",
    "load_config",
    "preset_configs",
]


class ConfigError(ValueError):
    pass


class FederatedSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    total_nodes: int = Field(10, ge=1)
    participants: int = Field(10, ge=1)
    rounds: int = Field(50, ge=0)
    interval: int = Field(2, ge=1)
    eps: float = Field(0.1, gt=0)
    eta: float = Field(1.0, gt=0)
    mode: Literal["GD", "SGD"] = "GD"
    sgd_batch_size: int = Field(5, ge=1)

    @model_validator(mode="after")
    def _participants_fit(self):
        if self.participants > self.total_nodes:
            raise ValueError(f"participants ({self.participants}) exceeds total_nodes ({self.total_nodes})")
        return self


class DataSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    num_train: int = Field(100, ge=1)
    num_test: int = Field(100, ge=1)
    noise_ratio: float = Field(0.0, ge=0.0, le=1.0)


class ExperimentConfig(BaseModel):
    """Everything one run needs. ``seed`` drives both data generation and training."""

    model_config = ConfigDict(extra="forbid")

    name: str = "run"
    preset: str | None = None
    architecture: list[int] = Field(default_factory=lambda: [2, 3, 2])
    seed: int = Field(0, ge=0, lt=2**64)
    federated: FederatedSection = Field(default_factory=FederatedSection)
    data: DataSection = Field(default_factory=DataSection)

    @field_validator("architecture")
    @classmethod
    def _arch_ok(cls, widths):
        Architecture(tuple(widths))
        if widths[0] != widths[-1]:
            raise ValueError(f"first and last widths must match for the unitary-learning task, got {widths}")
        return widths

    @model_validator(mode="after")
    def _enough_data(self):
        if self.federated.total_nodes > self.data.num_train:
            raise ValueError(
                f"total_nodes ({self.federated.total_nodes}) exceeds num_train ({self.data.num_train})"
            )
        return self

    def arch(self) -> Architecture:
        return Architecture(tuple(self.architecture))

    def fed_config(self) -> FedConfig:
        return FedConfig(seed=self.seed, **self.federated.model_dump())

    def dataset_spec(self) -> DatasetSpec:
        return DatasetSpec(
            num_qubits=self.architecture[0],
            num_nodes=self.federated.total_nodes,
            seed=self.seed,
            **self.data.model_dump(),
        )

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def build_config(raw: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then ``raw`` (file contents), then ``overrides`` (flags)."""
    doc = _merge(raw or {}, overrides or {})
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    raw = {}
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a mapping at top level")
    return build_config(raw, overrides)


# Sweep axes for each preset; every point is a partial override of the defaults.
PRESETS: dict[str, list[tuple[str, dict]]] = {
    "interval": [
        ("interval_1", {"federated": {"interval": 1}}),
        ("interval_2", {"federated": {"interval": 2}}),
        ("interval_4", {"federated": {"interval": 4}}),
        ("sgd_interval_2_batch_5", {"federated": {"interval": 2, "mode": "SGD", "sgd_batch_size": 5}}),
    ],
    "noise": [
        (f"noise_{r:.1f}", {"data": {"noise_ratio": r}})
        for r in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    ],
    "arch": [
        ("arch_" + "-".join(map(str, a)), {"architecture": list(a)})
        for a in ((2, 2), (2, 3, 2), (1, 2, 1), (2, 3, 3, 2))
    ],
    "epsilon": [
        (f"eps_{e:g}", {"federated": {"eps": e}}) for e in (0.01, 0.05, 0.1, 0.2, 0.5)
    ],
    "eta": [
        (f"eta_{e:g}", {"federated": {"eta": e}}) for e in (0.33, 0.5, 1.0, 1.25, 2.0, 5.0)
    ],
    # participant and node counts are not printed in the source figures
    "participants": [
        (f"participants_{p}", {"federated": {"total_nodes": 10, "participants": p}}) for p in (1, 2, 5, 10)
    ],
    "total-nodes": [
        (f"total_nodes_{n}", {"federated": {"total_nodes": n, "participants": 10}}) for n in (10, 20, 50, 100)
    ],
}


def preset_configs(name: str, seed: int = 0, base: dict | None = None) -> list[ExperimentConfig]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    out = []
    for point, override in PRESETS[name]:
        raw = _merge(base or {}, {"name": point, "preset": name, "seed": seed})
        out.append(build_config(raw, override))
    return out
