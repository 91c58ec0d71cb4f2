"""Pytest fixtures for tests."""

from collections.abc import Callable, Generator
from typing import Optional

import numpy as np
import pytest
import structlog

from src.config import get_settings
from src.core.grid import Field, Grid, build_grid, field_from_function
from src.core.noise import NoiseSpec
from src.core.operators import OperatorSpec, apply_A
from src.core.problem import ProblemSpec
from src.core.stepper import StepConfig


@pytest.fixture(autouse=True)
def fresh_settings() -> Generator[None, None, None]:
    """Drop cached settings so environment overrides in one test do not leak."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(autouse=True)
def reset_structlog() -> Generator[None, None, None]:
    """Undo setup_logging from CLI tests so later loggers do not write to a closed capture stream."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def grid_1d() -> Grid:
    return build_grid(1, 8)


@pytest.fixture
def grid_2d() -> Grid:
    return build_grid(2, 4)


@pytest.fixture
def single_node_grid() -> Grid:
    """One interior node, h = 1/2: A(u) = 8 u for p = 2."""
    return Grid(dim=1, n=1)


@pytest.fixture
def make_problem(grid_1d: Grid) -> Callable[..., ProblemSpec]:
    """Factory for small 1D problems; defaults give an inactive obstacle and no noise."""

    def factory(
        p: float = 2.0,
        kappa: float = 0.0,
        gamma: float = 0.0,
        c: float = 0.0,
        psi: Optional[Field] = None,
        f: Optional[Field] = None,
        u0: Optional[Field] = None,
        grid: Grid = grid_1d,
    ) -> ProblemSpec:
        psi = psi if psi is not None else Field.constant(grid, -100.0)
        f = f if f is not None else Field.zeros(grid)
        u0 = u0 if u0 is not None else field_from_function(grid, lambda x: np.sin(np.pi * x))
        return ProblemSpec(
            grid=grid,
            operator=OperatorSpec(p=p, kappa=kappa, gamma=gamma),
            noise=NoiseSpec(c=c),
            psi=psi,
            f=f,
            u0=u0,
            name="test",
        )

    return factory


@pytest.fixture
def stationary_problem(grid_1d: Grid) -> ProblemSpec:
    """u0 = psi and f = A(psi): the path never leaves the obstacle."""
    ops = OperatorSpec(p=2.0)
    psi = field_from_function(grid_1d, lambda x: 0.5 * np.sin(np.pi * x))
    return ProblemSpec(
        grid=grid_1d,
        operator=ops,
        noise=NoiseSpec(c=1.0),
        psi=psi,
        f=apply_A(ops, psi),
        u0=psi,
        name="stationary",
    )


@pytest.fixture
def ls_problem(grid_1d: Grid) -> ProblemSpec:
    """psi = 0, f = -1, p = 2: h^- = 1 everywhere."""
    psi = Field.zeros(grid_1d)
    return ProblemSpec(
        grid=grid_1d,
        operator=OperatorSpec(p=2.0),
        noise=NoiseSpec(c=0.5),
        psi=psi,
        f=Field.constant(grid_1d, -1.0),
        u0=psi + 0.5,
        name="ls",
    )


@pytest.fixture
def step_config() -> StepConfig:
    return StepConfig(dt=0.01, epsilon=1e-5)
