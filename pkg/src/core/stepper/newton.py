"""Drift-implicit, noise-explicit step of the penalized equation.

Each step solves for v

    v + dt [A(v) + gamma v + pen(v)] = u_n + dt f + G(u_n) dW

where pen(v) = -(1/eps) [(v - psi)^-]^{q-1}. The penalty derivative jumps by
dt/eps at the obstacle (and is unbounded there when q < 2), so Newton on v
alone crawls towards the contact set. The solver instead carries the force
mu = -pen(v) as a second unknown and runs semismooth Newton on

    v + dt [A(v) + gamma v - mu] = rhs,    min(mu, v - psi + gap(mu)) = 0,

with gap the inverse of the penalty. Full steps are taken while they reduce
the residual norm of that pair; otherwise the step is halved. Success is
judged on the sup norm of the original residual in v.
"""

from typing import Optional

import numpy as np
import scipy.sparse as sp
import structlog
from scipy.sparse.linalg import spsolve

from src.core.exceptions import NewtonDiverged
from src.core.grid import Field
from src.core.noise import NoiseIncrement, NoiseSpec, apply_G
from src.core.operators import OperatorSpec
from src.core.operators.p_laplacian import apply_A_flat, jacobian_A_flat
from src.core.operators.penalty import penalty_gap, penalty_gap_derivative, penalty_values
from src.core.stepper.base import StepConfig, StepResult

logger = structlog.get_logger()

ARMIJO = 1e-4
MIN_STEP = 2.0**-20


class ImplicitSystem:
    """The nonlinear system of one step on flat arrays.

    ``penalized=False`` drops the penalty term; that is the unconstrained map
    the variational-inequality solver works with.
    """

    def __init__(
        self,
        ops: OperatorSpec,
        cfg: StepConfig,
        psi: Field,
        rhs: np.ndarray,
        penalized: bool = True,
    ):
        self.ops = ops
        self.cfg = cfg
        self.grid_ops = psi.grid.difference_operators
        self.psi = psi.flat
        self.rhs = rhs
        self.penalized = penalized
        self.identity = sp.identity(psi.grid.dof, format="csr")

    def residual(self, v: np.ndarray) -> np.ndarray:
        drift = apply_A_flat(self.ops, self.grid_ops, v) + self.ops.gamma * v
        if self.penalized:
            drift = drift + penalty_values(v, self.psi, self.cfg.epsilon, self.cfg.q_tilde)
        return v + self.cfg.dt * drift - self.rhs

    def jacobian(self, v: np.ndarray, secant: bool = False) -> sp.csr_matrix:
        """Derivative of the residual without its penalty term."""
        jac = jacobian_A_flat(self.ops, self.grid_ops, v, secant) + self.ops.gamma * self.identity
        return (self.identity + self.cfg.dt * jac).tocsr()

    def force(self, v: np.ndarray) -> np.ndarray:
        return -penalty_values(v, self.psi, self.cfg.epsilon, self.cfg.q_tilde)

    def _contact_gap(self, v: np.ndarray, force: np.ndarray) -> np.ndarray:
        return v - self.psi + penalty_gap(force, self.cfg.epsilon, self.cfg.q_tilde)

    def mixed_residual(self, v: np.ndarray, force: np.ndarray) -> np.ndarray:
        """The residual with the penalty replaced by -force, stacked on the contact condition."""
        drift = apply_A_flat(self.ops, self.grid_ops, v) + self.ops.gamma * v - force
        balance = v + self.cfg.dt * drift - self.rhs
        return np.concatenate([balance, np.minimum(force, self._contact_gap(v, force))])

    def mixed_jacobian(self, v: np.ndarray, force: np.ndarray, secant: bool = False) -> sp.csc_matrix:
        contact = self._contact_gap(v, force) < force
        slope = penalty_gap_derivative(force, self.cfg.epsilon, self.cfg.q_tilde, self.cfg.pen_reg)
        return sp.bmat(
            [
                [self.jacobian(v, secant), -self.cfg.dt * self.identity],
                [sp.diags(contact.astype(float)), sp.diags(np.where(contact, slope, 1.0))],
            ],
            format="csc",
        )


def step_rhs(
    noise: NoiseSpec, cfg: StepConfig, psi: Field, f: Field, u_n: Field, inc: NoiseIncrement
) -> np.ndarray:
    """u_n + dt f + G(u_n) dW, the explicit part of the step."""
    return u_n.flat + cfg.dt * f.flat + apply_G(noise, u_n, psi, inc).flat


def _sup_norm(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if values.size else 0.0


def _backtrack(
    system: ImplicitSystem, v: np.ndarray, force: np.ndarray, mixed: np.ndarray, step: np.ndarray
) -> tuple[float, bool]:
    """Step length with sufficient decrease of |mixed residual|^2, full step first.

    Returns the length and whether it met the decrease condition; when no
    length does, the full step is taken anyway.
    """
    n = v.size
    norm0 = float(np.dot(mixed, mixed))
    t = 1.0
    while t >= MIN_STEP:
        trial = system.mixed_residual(v + t * step[:n], force + t * step[n:])
        if float(np.dot(trial, trial)) <= (1.0 - 2.0 * ARMIJO * t) * norm0:
            return t, True
        t *= 0.5
    logger.warning("No residual decrease along the Newton direction", residual_norm=norm0**0.5)
    return 1.0, False


def solve_implicit(system: ImplicitSystem, initial: np.ndarray) -> tuple[np.ndarray, int, float]:
    """Semismooth Newton on ``system`` started at ``initial``.

    Returns the root, the iteration count and the sup norm of its residual.

    Raises:
        NewtonDiverged: the residual stays above newton_tol after newton_max_iters
    """
    cfg = system.cfg
    n = initial.size
    v = initial.copy()
    force = system.force(v)
    secant = False
    sup = _sup_norm(system.residual(v))
    for iteration in range(cfg.newton_max_iters):
        if sup <= cfg.newton_tol:
            return v, iteration, sup
        mixed = system.mixed_residual(v, force)
        step = np.atleast_1d(spsolve(system.mixed_jacobian(v, force, secant), -mixed))
        t, decreased = _backtrack(system, v, force, mixed, step)
        v = v + t * step[:n]
        force = force + t * step[n:]
        # for p < 2 the tangent overshoots on steep edges; follow a damped step with secant weights
        secant = system.ops.p < 2.0 and (t < 1.0 or not decreased)
        sup = _sup_norm(system.residual(v))

    if sup <= cfg.newton_tol:
        return v, cfg.newton_max_iters, sup
    raise NewtonDiverged(
        f"residual {sup:.3e} > newton_tol {cfg.newton_tol:.1e} after {cfg.newton_max_iters} "
        "iterations; reduce dt or increase delta_reg"
    )


def extract_multiplier(cfg: StepConfig, psi: Field, u_next: Field) -> Field:
    """k = -(1/eps) max(0, psi - u_next)^{q-1}: nonpositive, zero off the contact set."""
    u_next._check(psi)
    return Field(u_next.grid, penalty_values(u_next.flat, psi.flat, cfg.epsilon, cfg.q_tilde))


def semi_implicit_step(
    ops: OperatorSpec,
    noise: NoiseSpec,
    cfg: StepConfig,
    psi: Field,
    f: Field,
    u_n: Field,
    inc: NoiseIncrement,
    initial: Optional[Field] = None,
) -> StepResult:
    """One step of the penalized scheme.

    Raises:
        NewtonDiverged: no root within newton_max_iters
        MonotonicityMarginViolated: dt too large for kappa and gamma
    """
    cfg.validate_against(ops)
    rhs = step_rhs(noise, cfg, psi, f, u_n, inc)
    system = ImplicitSystem(ops, cfg, psi, rhs)
    start = initial.flat if initial is not None else u_n.flat
    values, iterations, residual = solve_implicit(system, start)
    u_next = Field(u_n.grid, values)
    return StepResult(
        u_next=u_next,
        multiplier=extract_multiplier(cfg, psi, u_next),
        newton_iters=iterations,
        residual=residual,
    )
