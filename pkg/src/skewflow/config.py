"""Experiment configuration files (JSON) for the command-line runner."""

import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .family import PRESETS, CocycleFamily, preset

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TSpec(_Strict):
    kind: Literal["one_plus_pow2", "count_scaled", "explicit", "identity"] = "one_plus_pow2"
    rate: float = 1.0
    values: Tuple[float, ...] = ()


class FamilySpec(_Strict):
    schedule: Tuple[int, ...]
    schedule_extension: Literal["repeat_last", "arithmetic", "geometric"] = "repeat_last"
    t: TSpec = TSpec()
    arcs: int = Field(1, ge=1)
    rotation_rule: Literal["C4", "identity"] = "C4"
    branch_rule: Literal["inclusive", "printed"] = "inclusive"

    def build(self) -> CocycleFamily:
        return CocycleFamily.from_dict(self.model_dump())


class Params(_Strict):
    """Knobs for every subcommand; each one reads the fields it needs."""

    k_max: int = Field(6, ge=1)
    # validate
    levels: int = Field(6, ge=1)
    samples: int = Field(64, ge=1)
    tol: float = Field(1e-12, gt=0)
    # rigidity
    fiber_points: int = Field(1024, ge=1)
    random_bases: int = Field(64, ge=0)
    threshold: float = Field(0.05, gt=0)
    # proximal / liyorke
    pairs: Optional[List[Tuple[float, float]]] = None
    n_pairs: int = Field(20, ge=1)
    prox_threshold: float = Field(1e-3, gt=0)
    eps_prox: float = Field(1e-2, gt=0)
    eps_rec: float = Field(1e-1, gt=0)
    # aps
    base: str = "*0"
    anchor: Optional[float] = None
    horizon: int = Field(10_000, ge=0)
    # density (bursts grow like 2^n per level, so it has its own depth)
    density_k_max: int = Field(2, ge=0)
    prefix_len: int = Field(3, ge=0)
    fiber_bins: int = Field(3, ge=1)
    z0: Optional[float] = None
    sweep: Optional[int] = Field(None, ge=1)
    # trajectory
    steps: int = Field(100, ge=0)
    workers: Optional[int] = Field(None, ge=1)


class OutputSpec(_Strict):
    dir: str = "out"
    csv: bool = True


class ExperimentConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    preset: Optional[str] = None
    family: Optional[FamilySpec] = None
    params: Params = Params()
    seed: int = 0
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _one_family(self):
        if self.preset is not None and self.family is not None:
            raise ValueError("give either 'preset' or 'family', not both")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        return self

    def build_family(self) -> CocycleFamily:
        if self.family is not None:
            return self.family.build()
        return preset(self.preset or "proximal-c5")

    def echo(self) -> dict:
        """JSON-ready dump that parses back to an equal config."""
        return self.model_dump(mode="json")


class ConfigError(Exception):
    """Unreadable or invalid configuration."""


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def parse_config(data) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
