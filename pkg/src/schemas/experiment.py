"""Experiment configuration schemas (TOML files validated by pydantic)."""

import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import get_settings
from src.core.exceptions import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class StrictModel(BaseModel):
    """Base model rejecting unknown keys."""

    model_config = ConfigDict(extra="forbid")


class FieldKind(str, Enum):
    """How a nodal field is generated."""

    CONSTANT = "constant"
    SINE_MODE = "sine_mode"
    SIN = "sin"
    BALANCED = "balanced"
    OBSTACLE = "obstacle"


class FieldSpecConfig(StrictModel):
    """A nodal field by recipe.

    constant: value; sine_mode: amplitude * prod_i sin(mode pi x_i);
    sin: amplitude * sin(x_1) + value; balanced (f only): A(psi) + gamma psi + value;
    obstacle (u0 only): psi + value.
    """

    kind: FieldKind = FieldKind.CONSTANT
    value: float = 0.0
    amplitude: float = 1.0
    mode: int = Field(default=1, ge=1)


class NoiseConfig(StrictModel):
    kind: Literal["scalar", "multi_mode", "bounded_multi_mode"] = "scalar"
    c: float = 0.0
    modes: int = Field(default=1, ge=1)
    q_decay: float = Field(default=1.0, gt=0.0)
    clip: Optional[float] = Field(default=None, ge=0.0)

    @model_validator(mode="after")
    def _clip_for_bounded(self) -> "NoiseConfig":
        if self.kind == "bounded_multi_mode" and self.clip is None:
            raise ValueError("bounded_multi_mode noise needs clip")
        return self


class ScenarioConfig(StrictModel):
    """Problem data; unset fields come from the preset (or the defaults)."""

    preset: Optional[str] = None
    name: Optional[str] = None
    dim: Optional[int] = Field(default=None, ge=1, le=2)
    n: Optional[int] = Field(default=None, ge=2)
    p: Optional[float] = Field(default=None, gt=1.0)
    kappa: Optional[float] = None
    gamma: Optional[float] = None
    delta_reg: Optional[float] = Field(default=None, ge=0.0)
    noise: Optional[NoiseConfig] = None
    psi: Optional[FieldSpecConfig] = None
    f: Optional[FieldSpecConfig] = None
    u0: Optional[FieldSpecConfig] = None

    @model_validator(mode="after")
    def _field_roles(self) -> "ScenarioConfig":
        if self.psi is not None and self.psi.kind in (FieldKind.BALANCED, FieldKind.OBSTACLE):
            raise ValueError("psi cannot be 'balanced' or 'obstacle'")
        if self.f is not None and self.f.kind == FieldKind.OBSTACLE:
            raise ValueError("'obstacle' is only valid for u0")
        if self.u0 is not None and self.u0.kind == FieldKind.BALANCED:
            raise ValueError("'balanced' is only valid for f")
        return self


class StepSettings(StrictModel):
    dt: Optional[float] = Field(default=None, gt=0.0)
    epsilon: Optional[float] = Field(default=None, gt=0.0)
    newton_tol: Optional[float] = Field(default=None, gt=0.0)
    newton_max_iters: Optional[int] = Field(default=None, ge=1)
    pen_reg: Optional[float] = Field(default=None, ge=0.0)


class SimulateConfig(StrictModel):
    horizon: float = Field(default=1.0, ge=0.0)
    thinning: int = Field(default=1, ge=1)
    solver: Literal["penalty", "vi"] = "penalty"
    trajectory_id: int = Field(default=0, ge=0)


class CouplingConfig(StrictModel):
    horizon: float = Field(default=2.0, gt=0.0)
    n_paths: int = Field(default=64, ge=1)
    thinning: int = Field(default=10, ge=1)
    x: FieldSpecConfig = FieldSpecConfig(kind=FieldKind.OBSTACLE, value=1.0)
    y: FieldSpecConfig = FieldSpecConfig(kind=FieldKind.OBSTACLE, value=0.0)


class FunctionalConfig(StrictModel):
    functional: Literal["clipped_h_norm", "mean_value", "contact_fraction"] = "clipped_h_norm"
    bound: Optional[float] = Field(default=None, gt=0.0)
    scale: float = 1.0


class ErgodicConfig(FunctionalConfig):
    horizon: float = Field(default=50.0, gt=0.0)
    burn_in: float = Field(default=10.0, ge=0.0)
    n_paths: int = Field(default=16, ge=1)
    second_u0: FieldSpecConfig = FieldSpecConfig(kind=FieldKind.OBSTACLE, value=1.0)

    @model_validator(mode="after")
    def _window(self) -> "ErgodicConfig":
        if self.burn_in >= self.horizon:
            raise ValueError("burn_in must be < horizon")
        return self


class EquilibriumConfig(FunctionalConfig):
    times: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    n_paths: int = Field(default=64, ge=1)
    x: FieldSpecConfig = FieldSpecConfig(kind=FieldKind.OBSTACLE, value=1.0)


class TightnessConfig(StrictModel):
    horizons: list[float] = Field(default_factory=lambda: [10.0, 20.0, 40.0])
    n_paths: int = Field(default=8, ge=1)
    burn_in: float = Field(default=5.0, ge=0.0)
    max_spread: float = Field(default=1.5, ge=1.0)


class LSCheckConfig(StrictModel):
    horizon: float = Field(default=2.0, gt=0.0)
    n_paths: int = Field(default=8, ge=1)
    tol: Optional[float] = Field(default=None, gt=0.0)


class RateStudyConfig(StrictModel):
    epsilons: list[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4, 1e-5])
    horizon: float = Field(default=1.0, gt=0.0)
    n_paths: int = Field(default=32, ge=1)
    min_slope: float = 0.8


class ClassifyConfig(StrictModel):
    delta: float = Field(default=0.25, gt=0.0, lt=1.0)


class OpCheckConfig(StrictModel):
    p_values: list[float] = Field(default_factory=lambda: [1.5, 2.0, 3.0])
    kappa_values: list[float] = Field(default_factory=lambda: [-1.0, 0.0, 2.0])
    trials: int = Field(default=1000, ge=1)
    noise_c: float = 1.0


class ExperimentConfig(StrictModel):
    """One run: a scenario, the step settings and the per-command blocks."""

    master_seed: int = Field(default_factory=lambda: get_settings().master_seed, ge=0, lt=2**64)
    output_dir: Optional[Path] = None
    threads: Optional[int] = Field(default=None, ge=1)
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    step: StepSettings = Field(default_factory=StepSettings)
    simulate: SimulateConfig = Field(default_factory=SimulateConfig)
    coupling: CouplingConfig = Field(default_factory=CouplingConfig)
    ergodic: ErgodicConfig = Field(default_factory=ErgodicConfig)
    equilibrium: EquilibriumConfig = Field(default_factory=EquilibriumConfig)
    tightness: TightnessConfig = Field(default_factory=TightnessConfig)
    ls_check: LSCheckConfig = Field(default_factory=LSCheckConfig)
    rate_study: RateStudyConfig = Field(default_factory=RateStudyConfig)
    classify: ClassifyConfig = Field(default_factory=ClassifyConfig)
    op_check: OpCheckConfig = Field(default_factory=OpCheckConfig)


def load_config(path: Optional[Path]) -> ExperimentConfig:
    """Parse and validate a TOML experiment file (defaults when ``path`` is None).

    Raises:
        ConfigError: the file is missing or is not valid TOML
        pydantic.ValidationError: a value violates a declared constraint
    """
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return ExperimentConfig.model_validate(data)


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, str):
        # JSON string escapes are a subset of TOML basic-string escapes
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    raise ConfigError(f"cannot write {type(value).__name__} to TOML")


def _toml_table(data: dict[str, Any], prefix: str, lines: list[str]) -> None:
    tables = {key: value for key, value in data.items() if isinstance(value, dict)}
    for key, value in data.items():
        if key not in tables:
            lines.append(f"{key} = {_toml_value(value)}")
    for key, value in tables.items():
        name = f"{prefix}.{key}" if prefix else key
        if lines:
            lines.append("")
        lines.append(f"[{name}]")
        _toml_table(value, name, lines)


def dump_config(config: ExperimentConfig) -> str:
    """Render a resolved config as TOML that ``load_config`` reads back to the same model.

    Unset optional fields are left out, so they keep resolving from the preset.
    """
    lines: list[str] = []
    _toml_table(config.model_dump(mode="json", exclude_none=True), "", lines)
    return "\n".join(lines) + "\n"
