"""
Experiment configuration shared by the command line and replayable artifacts
"""

from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..core.config import SCHEDULE_PRESETS
from ..core.exceptions import ParameterError
from .graph import FamilySpec

COMMANDS = ("gen", "check-expansion", "census", "bounds", "contain", "fragment", "threshold")


class ExperimentConfig(BaseModel):
    """One run: command, family, size, free parameters, seed and outputs"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    family: str
    n: int = Field(..., ge=1)
    seed: int

    preset: Optional[str] = None
    eps: float = Field(default=0.1, gt=0.0)
    B: float = Field(default=1.0, gt=0.0)
    w: Optional[float] = Field(default=None, gt=0.0)
    C: float = Field(default=4.0, gt=0.0)
    delta: Optional[float] = Field(default=None, gt=0.0)
    round_cap: int = Field(default=5, ge=1)
    attempts: int = Field(default=8, ge=1)
    enforce_cap: bool = True
    trials: int = Field(default=100, ge=1)
    population: int = Field(default=10, ge=0)
    budget: Optional[int] = Field(default=None, ge=1)
    tol: float = Field(default=0.02, gt=0.0)
    mode: str = "exact"
    out: Optional[str] = None

    @field_validator("command")
    @classmethod
    def _known_command(cls, v):
        if v not in COMMANDS:
            raise ValueError(f"unknown command '{v}'")
        return v

    @field_validator("family")
    @classmethod
    def _parsable_family(cls, v):
        FamilySpec.parse(v)
        return v

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, v):
        if v is not None and v not in SCHEDULE_PRESETS:
            raise ValueError(f"unknown preset '{v}', expected one of {sorted(SCHEDULE_PRESETS)}")
        return v

    @property
    def spec(self) -> FamilySpec:
        return FamilySpec.parse(self.family)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _required() -> List[str]:
    return [name for name, field in ExperimentConfig.model_fields.items() if field.is_required()]


def parse_config(text: str) -> ExperimentConfig:
    """Flat YAML mapping to a validated config; unknown and missing keys are named"""
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        raise ParameterError(f"config is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ParameterError("config must be a flat key-value mapping")
    nested = sorted(k for k, v in data.items() if isinstance(v, (dict, list)))
    if nested:
        raise ParameterError(f"config values must be scalars, got nested values for {nested}")
    unknown = sorted(set(data) - set(ExperimentConfig.model_fields))
    if unknown:
        raise ParameterError(f"unknown config keys: {unknown}")
    missing = [k for k in _required() if k not in data]
    if missing:
        raise ParameterError(f"missing config keys: {missing}")
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        errors = e.errors()
        first = errors[0] if errors else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise ParameterError(f"invalid config value for '{where}': {first.get('msg', str(e))}") from e


def dump_config(config: ExperimentConfig) -> str:
    """Flat YAML with sorted keys; parse_config(dump_config(c)) == c"""
    return yaml.safe_dump(config.to_dict(), sort_keys=True, default_flow_style=False)
