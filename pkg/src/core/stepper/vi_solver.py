"""Reference solver for the exact obstacle step (no penalization).

Solves the discrete complementarity problem

    v >= psi,  R(v) >= 0,  (v - psi) R(v) = 0

where R is the unpenalized implicit residual. The general solver is a
primal-dual active-set (semismooth Newton) iteration on min(v - psi, R(v)) = 0;
for p = 2 a projected Gauss-Seidel sweep is available as an independent check.
"""

from typing import Literal

import numpy as np
import scipy.sparse as sp
import structlog
from scipy.sparse.linalg import spsolve

from src.core.exceptions import InvalidExponent, VISolverStalled
from src.core.grid import Field
from src.core.operators import OperatorSpec
from src.core.stepper.base import StepConfig
from src.core.stepper.newton import ImplicitSystem

logger = structlog.get_logger()

VIMethod = Literal["newton", "pgs"]

COMPLEMENTARITY_TOL = 1e-10
PGS_MAX_SWEEPS = 20_000
# rows with v - psi below this are treated as contact rows
CONTACT_TOL = 1e-12


def _vi_system(
    ops: OperatorSpec, cfg: StepConfig, psi: Field, f: Field, u_n: Field, noise_term: Field
) -> ImplicitSystem:
    rhs = u_n.flat + cfg.dt * f.flat + noise_term.flat
    return ImplicitSystem(ops, cfg, psi, rhs, penalized=False)


def _complementarity(system: ImplicitSystem, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """min(v - psi, R(v)/J_ii) nodally, with the residual used to compute it."""
    residual = system.residual(v)
    scale = system.jacobian(v).diagonal()
    return np.minimum(v - system.psi, residual / scale), residual


def _active_set_newton(system: ImplicitSystem, start: np.ndarray, tol: float) -> np.ndarray:
    v = np.maximum(start, system.psi)
    psi = system.psi
    for iteration in range(system.cfg.newton_max_iters):
        comp, residual = _complementarity(system, v)
        merit = float(np.max(np.abs(comp)))
        if merit <= tol:
            return v
        jac = system.jacobian(v)
        active = (v - psi) <= residual / jac.diagonal()
        # identity rows on the active set, Newton rows elsewhere
        keep = sp.diags((~active).astype(float))
        pin = sp.diags(active.astype(float))
        matrix = (keep @ jac + pin).tocsc()
        rhs = np.where(active, psi - v, -residual)
        step = np.atleast_1d(spsolve(matrix, rhs))

        t = 1.0
        accepted = False
        while t >= 2.0**-20:
            trial = v + t * step
            if t == 1.0:
                trial[active] = psi[active]
            trial_comp, _ = _complementarity(system, trial)
            if float(np.max(np.abs(trial_comp))) < merit:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            trial = v + step
            trial[active] = psi[active]
            logger.debug("Active-set step without merit decrease", iteration=iteration, merit=merit)
        v = trial

    comp, _ = _complementarity(system, v)
    merit = float(np.max(np.abs(comp)))
    if merit <= tol:
        return v
    raise VISolverStalled(
        f"complementarity residual {merit:.3e} > {tol:.1e} after "
        f"{system.cfg.newton_max_iters} active-set iterations"
    )


def _projected_gauss_seidel(system: ImplicitSystem, start: np.ndarray, tol: float) -> np.ndarray:
    if system.ops.p != 2.0:
        raise InvalidExponent(f"projected Gauss-Seidel needs p = 2, got {system.ops.p}")
    # for p = 2 the system is affine: R(v) = M v - rhs
    matrix = system.jacobian(np.zeros_like(start)).tocsr()
    diagonal = matrix.diagonal()
    rhs, psi = system.rhs, system.psi
    indptr, indices, data = matrix.indptr, matrix.indices, matrix.data
    v = np.maximum(start, psi)
    for sweep in range(PGS_MAX_SWEEPS):
        change = 0.0
        for i in range(v.size):
            row = slice(indptr[i], indptr[i + 1])
            off = float(np.dot(data[row], v[indices[row]])) - diagonal[i] * v[i]
            value = max(psi[i], (rhs[i] - off) / diagonal[i])
            change = max(change, abs(value - v[i]))
            v[i] = value
        if change <= 0.1 * tol:
            comp, _ = _complementarity(system, v)
            if float(np.max(np.abs(comp))) <= tol:
                logger.debug("Projected Gauss-Seidel converged", sweeps=sweep + 1)
                return v
    raise VISolverStalled(f"projected Gauss-Seidel did not converge in {PGS_MAX_SWEEPS} sweeps")


def vi_reference_step(
    ops: OperatorSpec,
    cfg: StepConfig,
    psi: Field,
    f: Field,
    u_n: Field,
    noise_term: Field,
    method: VIMethod = "newton",
    tol: float = COMPLEMENTARITY_TOL,
) -> Field:
    """Exact discrete variational-inequality step; the eps -> 0 limit of the penalized step.

    The returned field satisfies v >= psi nodally.

    Raises:
        VISolverStalled: complementarity residual above tol when iterations run out
        MonotonicityMarginViolated: dt too large for kappa and gamma
    """
    cfg.validate_against(ops)
    system = _vi_system(ops, cfg, psi, f, u_n, noise_term)
    if method == "pgs":
        values = _projected_gauss_seidel(system, u_n.flat.copy(), tol)
    else:
        values = _active_set_newton(system, u_n.flat, tol)
    return Field(u_n.grid, np.maximum(values, psi.flat))


def vi_multiplier(
    ops: OperatorSpec,
    cfg: StepConfig,
    psi: Field,
    f: Field,
    u_n: Field,
    noise_term: Field,
    v: Field,
) -> Field:
    """k = -R(v)^+ / dt on the contact set of v, zero elsewhere."""
    system = _vi_system(ops, cfg, psi, f, u_n, noise_term)
    residual = system.residual(v.flat)
    contact = (v.flat - psi.flat) <= CONTACT_TOL
    k = np.where(contact, -np.maximum(residual, 0.0) / cfg.dt, 0.0)
    return Field(v.grid, k + 0.0)
