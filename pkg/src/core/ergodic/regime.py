"""Which long-time statements a problem's constants certify.

The classifier never simulates: it evaluates the hypotheses of the existence
and uniqueness results from the operator constants, the noise constants and
the discrete embedding constant C_D, and returns the strongest conclusion
together with every slack it computed.
"""

import numpy as np
import structlog

from src.core.ergodic.base import Existence, PCase, RegimeReport
from src.core.exceptions import InvariantViolation
from src.core.grid import poincare_embedding_constant
from src.core.problem import ProblemSpec

logger = structlog.get_logger()

DEFAULT_DELTA = 0.25
K_GRID = np.logspace(-2.0, 4.0, 81)


def admissible_exponent(p: float, dim: int) -> bool:
    """p > max(1, 2 dim / (dim + 2)); always true on the grids supported here."""
    return p > max(1.0, 2.0 * dim / (dim + 2.0))


def noise_K_term(L_G: float, K: np.ndarray) -> np.ndarray:
    """L_G (1 + K^2) / (2 K^2); decreases to L_G / 2 as K grows."""
    return L_G * (1.0 + K**2) / (2.0 * K**2)


def _p_case(p: float) -> PCase:
    if p > 2.0:
        return PCase.GT2
    if p == 2.0:
        return PCase.EQ2
    return PCase.LT2


def classify_regime(spec: ProblemSpec, delta: float = DEFAULT_DELTA) -> RegimeReport:
    """Evaluate the existence and uniqueness hypotheses for ``spec``.

    For p < 2 the zero-order term kappa u is carried by the perturbation
    F(u) = (gamma + kappa) u, which leaves lambda = lambda_T = 0 for the
    pure p-Laplacian. The uniqueness margin L_G/2 + lambda_T - gamma is the
    same expression in every case.

    Raises:
        InvariantViolation: delta outside (0, 1)
    """
    if not 0.0 < delta < 1.0:
        raise InvariantViolation(f"delta must lie in (0, 1), got {delta}")

    ops, noise = spec.operator, spec.noise
    p = ops.p
    p_case = _p_case(p)
    admissible = admissible_exponent(p, spec.d)
    C_D = poincare_embedding_constant(spec.grid)
    L_G = noise.L_G

    if p_case == PCase.LT2:
        gamma_eff = ops.gamma + ops.kappa
        lambda_eff = 0.0
        lambda_T_eff = 0.0
    else:
        gamma_eff = ops.gamma
        lambda_eff = ops.lam - ops.gamma
        lambda_T_eff = ops.lambda_T

    K_term = noise_K_term(L_G, K_GRID)
    cond_by_K = (1.0 - delta) * ops.alpha - C_D * np.maximum(lambda_eff + K_term, 0.0)
    gamma_by_K = gamma_eff - (K_term + lambda_eff)
    best = int(np.argmin(K_term))
    cond_slack = float(np.max(cond_by_K))
    gamma_slack = float(np.max(gamma_by_K))
    margin = L_G / 2.0 + lambda_T_eff - gamma_eff
    bounded = noise.is_bounded

    if p_case == PCase.GT2:
        example_margin = L_G / 2.0 - ops.kappa
        example_holds = example_margin < 0
    elif p_case == PCase.EQ2:
        example_margin = 2.0 * L_G - ops.kappa
        example_holds = example_margin <= 0
    else:
        example_margin = 2.0 * L_G - ops.kappa
        example_holds = example_margin < 0

    uniqueness = admissible and margin < 0
    if not admissible:
        existence = Existence.NONE_CERTIFIED
    elif uniqueness or p_case == PCase.GT2:
        existence = Existence.ERGODIC_INVARIANT
    elif p_case == PCase.EQ2:
        certified = cond_slack > 0 or (bounded and lambda_eff <= 0)
        existence = Existence.ERGODIC_INVARIANT if certified else Existence.NONE_CERTIFIED
    else:
        certified = gamma_slack > 0 or (bounded and lambda_eff <= 0)
        existence = Existence.INVARIANT if certified else Existence.NONE_CERTIFIED

    logger.debug(
        "Classified regime",
        p=p,
        existence=existence.value,
        uniqueness=uniqueness,
        uniqueness_margin=margin,
    )
    return RegimeReport(
        p_case=p_case,
        existence=existence,
        uniqueness=uniqueness,
        admissible=admissible,
        cond_invariant_slack=cond_slack,
        bounded_noise=bounded,
        gamma_condition=gamma_slack,
        uniqueness_margin=margin,
        K_opt=float(K_GRID[best]),
        example_margin=example_margin,
        example_holds=example_holds,
        C_D=C_D,
        L_G=L_G,
        delta=delta,
        lambda_eff=lambda_eff,
        lambda_T_eff=lambda_T_eff,
        gamma_eff=gamma_eff,
        K_grid=K_GRID.copy(),
        cond_invariant_by_K=cond_by_K,
        gamma_condition_by_K=gamma_by_K,
    )
