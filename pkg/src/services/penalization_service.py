"""Penalization experiments: multiplier bounds, eps-rates and discretization checks."""

from collections.abc import Sequence
from typing import Optional

import numpy as np
import structlog

from src.core.ergodic import (
    DtRefinementStudy,
    FitStatus,
    LSReport,
    PenaltyConsistency,
    RateStudy,
    ensemble_mean,
    fit_loglog,
)
from src.core.exceptions import InvalidEpsilon, InvalidWindow, SolverError, StepFailed
from src.core.grid import Field
from src.core.noise import IncrementSource, NoiseIncrement
from src.core.problem import ProblemSpec
from src.core.stepper import (
    SolverKind,
    StepConfig,
    Trajectory,
    semi_implicit_step,
    simulate_trajectory,
    step_count,
)
from src.services.ensemble_service import EnsembleService

logger = structlog.get_logger()

MIN_EPSILONS = 3
# squared-error points below this multiple of (100 newton_tol)^2 sit on the solver floor
FLOOR_FACTOR = 3.0


def _check_epsilons(epsilons: Sequence[float], minimum: int) -> np.ndarray:
    eps = np.asarray(epsilons, dtype=float)
    if eps.size < minimum:
        raise InvalidEpsilon(f"need at least {minimum} epsilon values, got {eps.size}")
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise InvalidEpsilon("epsilons must be positive and strictly decreasing")
    return eps


def _sq_H_distance(grid_volume: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise ||a_i - b_i||_H^2."""
    diff = a - b
    return grid_volume * np.sum(diff * diff, axis=-1)


class PenalizationService:
    """Experiments on the penalized scheme and its exact-obstacle limit."""

    def __init__(self, ensemble: Optional[EnsembleService] = None):
        self.ensemble = ensemble or EnsembleService()

    def _pool(self, seed: Optional[int]) -> EnsembleService:
        if seed is None or seed == self.ensemble.master_seed:
            return self.ensemble
        return EnsembleService(threads=self.ensemble.threads, master_seed=seed)

    def ls_check(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        horizon: float,
        n_paths: int,
        seed: Optional[int] = None,
        tol: float = 1e-8,
    ) -> LSReport:
        """Check 0 <= -k <= h^- at every node, step and path."""
        pool = self._pool(seed)
        h_minus = problem.compatibility.h_minus.flat

        def run(trajectory_id: int) -> tuple[float, float]:
            worst = {"lower": np.inf, "upper": -np.inf}

            def check(_step: int, _t: float, _u: Field, k: Field) -> None:
                minus_k = -k.flat
                worst["lower"] = min(worst["lower"], float(np.min(minus_k)))
                worst["upper"] = max(worst["upper"], float(np.max(minus_k - h_minus)))

            simulate_trajectory(
                problem,
                cfg,
                horizon,
                trajectory_id,
                pool.master_seed,
                record_states=False,
                observer=check,
            )
            return worst["lower"], worst["upper"]

        logger.info("Running Lewy-Stampacchia check", n_paths=n_paths, epsilon=cfg.epsilon)
        results = pool.map(run, range(n_paths))
        report = LSReport(
            max_violation_lower=float(min(r[0] for r in results)),
            max_violation_upper=float(max(r[1] for r in results)),
            tol=tol,
            h_minus_sup=problem.compatibility.h_minus_sup,
            n_paths=n_paths,
        )
        if not report.passed:
            logger.warning("Lewy-Stampacchia bound violated", **report.to_dict())
        return report

    def _paired_runs(
        self,
        problem: ProblemSpec,
        cfg_base: StepConfig,
        epsilons: np.ndarray,
        horizon: float,
        trajectory_id: int,
        master_seed: int,
    ) -> tuple[Trajectory, list[Trajectory]]:
        """Exact-obstacle path and one penalized path per eps, all on the same increments."""
        reference = simulate_trajectory(
            problem, cfg_base, horizon, trajectory_id, master_seed, solver=SolverKind.VI
        )
        penalized = [
            simulate_trajectory(problem, cfg_base.with_epsilon(float(eps)), horizon, trajectory_id, master_seed)
            for eps in epsilons
        ]
        return reference, penalized

    def penalization_rate_study(
        self,
        problem: ProblemSpec,
        cfg_base: StepConfig,
        epsilons: Sequence[float],
        horizon: float,
        n_paths: int,
        seed: Optional[int] = None,
    ) -> RateStudy:
        """E sup_t ||u_eps - u_ref||_H^2 per eps with a log-log slope fit.

        Raises:
            InvalidEpsilon: fewer than three epsilons or not strictly decreasing
            StepFailed: a solver failed for one of the eps values
        """
        eps = _check_epsilons(epsilons, MIN_EPSILONS)
        pool = self._pool(seed)
        volume = problem.grid.cell_volume

        def run(trajectory_id: int) -> np.ndarray:
            reference, penalized = self._paired_runs(
                problem, cfg_base, eps, horizon, trajectory_id, pool.master_seed
            )
            return np.array(
                [float(np.max(_sq_H_distance(volume, path.states, reference.states))) for path in penalized]
            )

        logger.info("Running penalization rate study", epsilons=eps.tolist(), n_paths=n_paths)
        samples = np.array(pool.map(run, range(n_paths)))
        errors = samples.mean(axis=0)
        stderr = np.array([ensemble_mean(samples[:, j])[1] for j in range(eps.size)])

        p = problem.operator.p
        theoretical = 1.0 if p >= 2 else 1.0 / (p - 1.0)
        floor = FLOOR_FACTOR * (100.0 * cfg_base.newton_tol) ** 2
        fit = fit_loglog(eps, errors, floor=floor)
        return RateStudy(
            epsilons=eps,
            errors=errors,
            stderr=stderr,
            fitted_slope=fit.slope if fit else None,
            theoretical_slope=theoretical,
            n_paths=n_paths,
            status=FitStatus.FITTED if fit else FitStatus.DEGENERATE,
        )

    def penalty_consistency(
        self,
        problem: ProblemSpec,
        cfg_base: StepConfig,
        epsilons: Sequence[float],
        horizon: float,
        n_paths: int,
        seed: Optional[int] = None,
    ) -> PenaltyConsistency:
        """Distance to the exact-obstacle path at the final time, complementarity and violation per eps."""
        eps = _check_epsilons(epsilons, 2)
        pool = self._pool(seed)
        volume = problem.grid.cell_volume
        psi = problem.psi.flat

        def run(trajectory_id: int) -> np.ndarray:
            reference, penalized = self._paired_runs(
                problem, cfg_base, eps, horizon, trajectory_id, pool.master_seed
            )
            rows = []
            for path in penalized:
                final, k = path.states[-1], path.multipliers[-1]
                rows.append(
                    (
                        float(np.max(np.abs(final - reference.states[-1]))),
                        volume * float(np.dot(-k, final - psi)),
                        float(np.max(np.maximum(psi - path.states, 0.0))),
                    )
                )
            return np.array(rows)

        samples = np.array(pool.map(run, range(n_paths)))
        return PenaltyConsistency(
            epsilons=eps,
            sup_errors=samples[:, :, 0].mean(axis=0),
            complementarity=samples[:, :, 1].mean(axis=0),
            max_violation=samples[:, :, 2].max(axis=0),
            n_paths=n_paths,
        )

    def dt_refinement_study(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        horizon: float,
        levels: int,
        n_paths: int,
        seed: Optional[int] = None,
    ) -> DtRefinementStudy:
        """Cauchy differences between dt and dt/2 on one Brownian path per sample.

        Coarse increments are sums of the finest ones, so every level sees the
        same path. Differences are sup over the coarsest time grid of the
        squared H distance.

        Raises:
            InvalidWindow: levels < 1 or horizon not a multiple of dt
        """
        if levels < 1:
            raise InvalidWindow(f"levels must be >= 1, got {levels}")
        coarse_steps = step_count(horizon, cfg.dt)
        finest = 2**levels
        pool = self._pool(seed)
        volume = problem.grid.cell_volume
        ops, noise, psi, f = problem.operator, problem.noise, problem.psi, problem.f

        def run(trajectory_id: int) -> np.ndarray:
            source = IncrementSource(noise, pool.master_seed, trajectory_id)
            fine_dt = cfg.dt / finest
            fine = np.array(
                [source.increment(i, fine_dt).betas for i in range(coarse_steps * finest)]
            ).reshape(coarse_steps * finest, noise.modes)
            paths = []
            for level in range(levels + 1):
                block = 2 ** (levels - level)
                level_cfg = cfg.with_dt(cfg.dt / 2**level)
                betas = fine.reshape(-1, block, noise.modes).sum(axis=1)
                u = problem.u0
                states = [u.flat.copy()]
                per_coarse = 2**level
                for step, beta in enumerate(betas):
                    inc = NoiseIncrement(dt=level_cfg.dt, betas=beta)
                    try:
                        u = semi_implicit_step(ops, noise, level_cfg, psi, f, u, inc).u_next
                    except SolverError as exc:
                        raise StepFailed(str(exc), step + 1, trajectory_id) from exc
                    if (step + 1) % per_coarse == 0:
                        states.append(u.flat.copy())
                paths.append(np.array(states))
            return np.array(
                [float(np.max(_sq_H_distance(volume, paths[j], paths[j + 1]))) for j in range(levels)]
            )

        logger.info("Running dt refinement study", levels=levels, n_paths=n_paths)
        samples = np.array(pool.map(run, range(n_paths)))
        dts = cfg.dt / 2.0 ** np.arange(levels)
        return DtRefinementStudy(dts=dts, differences=samples.mean(axis=0), n_paths=n_paths)
