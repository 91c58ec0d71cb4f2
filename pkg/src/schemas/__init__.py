"""Pydantic schemas for experiment configuration files."""

from src.schemas.experiment import (
    ClassifyConfig,
    CouplingConfig,
    EquilibriumConfig,
    ErgodicConfig,
    ExperimentConfig,
    FieldKind,
    FieldSpecConfig,
    LSCheckConfig,
    NoiseConfig,
    OpCheckConfig,
    RateStudyConfig,
    ScenarioConfig,
    SimulateConfig,
    StepSettings,
    TightnessConfig,
    dump_config,
    load_config,
)

__all__ = [
    "ClassifyConfig",
    "CouplingConfig",
    "EquilibriumConfig",
    "ErgodicConfig",
    "ExperimentConfig",
    "FieldKind",
    "FieldSpecConfig",
    "LSCheckConfig",
    "NoiseConfig",
    "OpCheckConfig",
    "RateStudyConfig",
    "ScenarioConfig",
    "SimulateConfig",
    "StepSettings",
    "TightnessConfig",
    "dump_config",
    "load_config",
]
