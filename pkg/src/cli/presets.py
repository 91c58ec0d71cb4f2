"""Named scenarios and the builders turning scenario configs into problems."""

from typing import Optional

import numpy as np

from src.config import get_settings
from src.core.exceptions import ConfigError, UnknownPreset
from src.core.grid import Field, Grid, build_grid, field_from_function
from src.core.noise import NoiseSpec
from src.core.operators import OperatorSpec, apply_A
from src.core.problem import ProblemSpec
from src.core.stepper import StepConfig
from src.schemas.experiment import (
    FieldKind,
    FieldSpecConfig,
    NoiseConfig,
    ScenarioConfig,
    StepSettings,
)

DEFAULT_N = {1: 64, 2: 32}
DEFAULT_DT = 0.01
DEFAULT_EPSILON = 1e-5

_SIN = FieldSpecConfig(kind=FieldKind.SIN, amplitude=1.0)
_ZERO = FieldSpecConfig(kind=FieldKind.CONSTANT, value=0.0)


def _example(p: float, kappa: float, dim: int = 1) -> ScenarioConfig:
    """du - div(|grad u|^{p-2} grad u) + kappa u + k = sin(x) + c u d beta, u >= 0."""
    return ScenarioConfig(
        dim=dim,
        p=p,
        kappa=kappa,
        gamma=0.0,
        noise=NoiseConfig(kind="scalar", c=1.0),
        psi=_ZERO,
        f=_SIN,
        u0=FieldSpecConfig(kind=FieldKind.OBSTACLE, value=1.0),
    )


PRESETS: dict[str, ScenarioConfig] = {
    "stationary": ScenarioConfig(
        dim=1,
        p=2.0,
        kappa=0.0,
        gamma=0.0,
        noise=NoiseConfig(kind="scalar", c=1.0),
        psi=FieldSpecConfig(kind=FieldKind.SINE_MODE, amplitude=0.5, mode=1),
        f=FieldSpecConfig(kind=FieldKind.BALANCED),
        u0=FieldSpecConfig(kind=FieldKind.OBSTACLE, value=0.0),
    ),
    "example-p3": _example(p=3.0, kappa=0.0),
    "example-p3-unique": _example(p=3.0, kappa=1.0),
    "example-p2-unique": _example(p=2.0, kappa=2.0),
    "example-p15-unique": _example(p=1.5, kappa=3.0, dim=1),
    "ls-regular": ScenarioConfig(
        dim=1,
        p=2.0,
        kappa=0.0,
        gamma=0.0,
        noise=NoiseConfig(kind="scalar", c=0.5),
        psi=_ZERO,
        f=FieldSpecConfig(kind=FieldKind.CONSTANT, value=-1.0),
        u0=FieldSpecConfig(kind=FieldKind.OBSTACLE, value=0.5),
    ),
}

_DEFAULT_SCENARIO = ScenarioConfig(
    dim=1,
    p=2.0,
    kappa=0.0,
    gamma=0.0,
    noise=NoiseConfig(),
    psi=_ZERO,
    f=_ZERO,
    u0=FieldSpecConfig(kind=FieldKind.OBSTACLE, value=0.0),
)


def preset_names() -> list[str]:
    return sorted(PRESETS)


def resolve_scenario(scenario: ScenarioConfig) -> ScenarioConfig:
    """Fill unset fields from the named preset (or the defaults).

    Raises:
        UnknownPreset: the preset name is not registered
    """
    if scenario.preset is not None and scenario.preset not in PRESETS:
        raise UnknownPreset(f"unknown preset '{scenario.preset}'; known: {', '.join(preset_names())}")
    base = PRESETS[scenario.preset] if scenario.preset else _DEFAULT_SCENARIO
    merged = {**base.model_dump(exclude_none=True), **scenario.model_dump(exclude_none=True)}
    merged.setdefault("name", scenario.preset or "custom")
    if merged.get("n") is None:
        merged["n"] = DEFAULT_N[merged["dim"]]
    return ScenarioConfig.model_validate(merged)


def build_field(
    spec: FieldSpecConfig,
    grid: Grid,
    psi: Optional[Field] = None,
    ops: Optional[OperatorSpec] = None,
) -> Field:
    """Sample a field recipe on ``grid`` (balanced and obstacle need psi, ops)."""
    if spec.kind == FieldKind.CONSTANT:
        return Field.constant(grid, spec.value)
    if spec.kind == FieldKind.SINE_MODE:

        def mode(*coords: np.ndarray) -> np.ndarray:
            out = np.full(grid.shape, spec.amplitude)
            for x in coords:
                out = out * np.sin(spec.mode * np.pi * x)
            return out

        return field_from_function(grid, mode)
    if spec.kind == FieldKind.SIN:
        return field_from_function(grid, lambda x, *_: spec.amplitude * np.sin(x) + spec.value)
    if psi is None:
        raise ConfigError(f"field kind '{spec.kind.value}' needs the obstacle")
    if spec.kind == FieldKind.OBSTACLE:
        return psi + spec.value
    if ops is None:
        raise ConfigError("balanced forcing needs the operator")
    return apply_A(ops, psi) + ops.gamma * psi + spec.value


def build_problem(scenario: ScenarioConfig) -> ProblemSpec:
    """ProblemSpec from a scenario, presets resolved.

    Raises:
        UnknownPreset: unknown preset name
        InvariantViolation: the resolved data violate a problem invariant
    """
    resolved = resolve_scenario(scenario)
    grid = build_grid(resolved.dim, resolved.n)
    delta_reg = resolved.delta_reg
    if delta_reg is None and resolved.p < 2:
        delta_reg = get_settings().default_delta_reg
    ops = OperatorSpec(
        p=resolved.p,
        kappa=resolved.kappa,
        gamma=resolved.gamma,
        delta_reg=delta_reg,
    )
    noise_cfg = resolved.noise or NoiseConfig()
    noise = NoiseSpec(
        kind=noise_cfg.kind,
        c=noise_cfg.c,
        modes=noise_cfg.modes,
        q_decay=noise_cfg.q_decay,
        clip=noise_cfg.clip,
    )
    psi = build_field(resolved.psi, grid)
    f = build_field(resolved.f, grid, psi=psi, ops=ops)
    u0 = build_field(resolved.u0, grid, psi=psi, ops=ops)
    return ProblemSpec(
        grid=grid, operator=ops, noise=noise, psi=psi, f=f, u0=u0, name=resolved.name or "custom"
    )


def build_step_config(ops: OperatorSpec, step: Optional[StepSettings] = None) -> StepConfig:
    """StepConfig with q_tilde = min(p, 2); unset values from settings and preset defaults.

    Raises:
        MonotonicityMarginViolated: dt too large for kappa and gamma
    """
    step = step or StepSettings()
    settings = get_settings()
    return StepConfig.for_operator(
        ops,
        dt=step.dt if step.dt is not None else DEFAULT_DT,
        epsilon=step.epsilon if step.epsilon is not None else DEFAULT_EPSILON,
        newton_tol=step.newton_tol if step.newton_tol is not None else settings.default_newton_tol,
        newton_max_iters=(
            step.newton_max_iters
            if step.newton_max_iters is not None
            else settings.default_newton_max_iters
        ),
        pen_reg=step.pen_reg if step.pen_reg is not None else settings.default_pen_reg,
    )


def preset(name: str) -> tuple[ProblemSpec, StepConfig]:
    """Problem and default step configuration of a named scenario.

    Raises:
        UnknownPreset: unknown name
    """
    problem = build_problem(ScenarioConfig(preset=name))
    return problem, build_step_config(problem.operator)
