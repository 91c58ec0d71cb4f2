"""Paths of the penalized (or exact obstacle) equation."""

from typing import Callable, Optional, Union

import numpy as np
import structlog

from src.core.exceptions import InvalidWindow, SolverError, StepFailed
from src.core.grid import Field, norm_H, norm_Vp_power
from src.core.noise import IncrementSource, apply_G
from src.core.problem import ProblemSpec
from src.core.stepper.base import SolverKind, StepConfig, Trajectory
from src.core.stepper.newton import semi_implicit_step
from src.core.stepper.vi_solver import vi_multiplier, vi_reference_step

logger = structlog.get_logger()

# observer(step_index, t, u, k), called for the initial state and after every step
StepObserver = Callable[[int, float, Field, Field], None]

HORIZON_RTOL = 1e-9


def step_count(horizon: float, dt: float) -> int:
    """N with horizon = N dt.

    Raises:
        InvalidWindow: horizon negative or not an integer multiple of dt
    """
    if horizon < 0:
        raise InvalidWindow(f"horizon must be >= 0, got {horizon}")
    steps = int(round(horizon / dt))
    if abs(steps * dt - horizon) > HORIZON_RTOL * max(1.0, horizon):
        raise InvalidWindow(f"horizon {horizon} is not an integer multiple of dt={dt}")
    return steps


def simulate_trajectory(
    problem: ProblemSpec,
    cfg: StepConfig,
    horizon: float,
    trajectory_id: int,
    master_seed: int,
    thinning: int = 1,
    solver: Union[SolverKind, str] = SolverKind.PENALTY,
    record_states: bool = True,
    observer: Optional[StepObserver] = None,
    u0: Optional[Field] = None,
) -> Trajectory:
    """Run N = horizon/dt steps from u0 with the increments of (master_seed, trajectory_id).

    States are recorded every ``thinning`` steps and at the final step. With
    ``record_states=False`` only the initial and final states are kept and the
    observer sees every step.

    Raises:
        InvalidWindow: horizon is not N dt, or thinning < 1
        StepFailed: a step raised a solver error (carries the step index)
    """
    solver = SolverKind(solver)
    if thinning < 1:
        raise InvalidWindow(f"thinning must be >= 1, got {thinning}")
    cfg.validate_against(problem.operator)
    n_steps = step_count(horizon, cfg.dt)
    start = u0 if u0 is not None else problem.u0
    problem.check_admissible(start)
    source = IncrementSource(problem.noise, master_seed, trajectory_id)
    ops, psi, f = problem.operator, problem.psi, problem.f

    u = start
    k = Field.zeros(problem.grid)
    times, states, multipliers = [0.0], [u.flat.copy()], [k.flat.copy()]
    if observer is not None:
        observer(0, 0.0, u, k)

    total_iters = 0
    max_residual = 0.0
    for step in range(n_steps):
        inc = source.increment(step, cfg.dt)
        try:
            if solver == SolverKind.VI:
                noise_term = apply_G(problem.noise, u, psi, inc)
                u_next = vi_reference_step(ops, cfg, psi, f, u, noise_term)
                k = vi_multiplier(ops, cfg, psi, f, u, noise_term, u_next)
            else:
                result = semi_implicit_step(ops, problem.noise, cfg, psi, f, u, inc)
                u_next, k = result.u_next, result.multiplier
                total_iters += result.newton_iters
                max_residual = max(max_residual, result.residual)
        except SolverError as exc:
            logger.error("Step failed", trajectory_id=trajectory_id, step=step + 1, error=str(exc))
            raise StepFailed(str(exc), step + 1, trajectory_id) from exc
        u = u_next
        t = (step + 1) * cfg.dt
        if observer is not None:
            observer(step + 1, t, u, k)
        last = step + 1 == n_steps
        if last or (record_states and (step + 1) % thinning == 0):
            times.append(t)
            states.append(u.flat.copy())
            multipliers.append(k.flat.copy())

    return Trajectory(
        grid=problem.grid,
        trajectory_id=trajectory_id,
        master_seed=master_seed,
        dt=cfg.dt,
        times=np.array(times),
        states=np.array(states),
        multipliers=np.array(multipliers),
        solver=solver,
        total_newton_iters=total_iters,
        max_residual=max_residual,
    )


def trajectory_summary(trajectory: Trajectory, problem: ProblemSpec) -> list[dict[str, float]]:
    """Rows (t, ||u||_H, ||u||_V^p, min(u - psi), ||k||_inf) for the summary CSV."""
    rows = []
    p = problem.operator.p
    for index, t in enumerate(trajectory.times):
        u = trajectory.state(index)
        k = trajectory.multiplier(index)
        rows.append(
            {
                "t": float(t),
                "norm_H": norm_H(u),
                "norm_Vp_power": norm_Vp_power(u, p),
                "min_gap": float(np.min(u.flat - problem.psi.flat)),
                "multiplier_sup": k.sup_norm(),
            }
        )
    return rows
