"""Long-time experiments: coupling, Krylov-Bogoliubov averages, mixing and tightness."""

from collections.abc import Callable, Sequence
from typing import Optional

import numpy as np
import structlog

from src.core.ergodic import (
    CouplingFit,
    EquilibriumReport,
    ErgodicAgreement,
    ErgodicEstimate,
    FitStatus,
    Functional,
    TightnessTable,
    TimeShiftReport,
    batch_means_stderr,
    classify_regime,
    ensemble_mean,
    ensemble_mean_series,
    fit_exponential,
)
from src.core.exceptions import InvalidWindow
from src.core.grid import Field, norm_H, norm_Vp_power
from src.core.problem import ProblemSpec
from src.core.stepper import StepConfig, simulate_trajectory, step_count
from src.services.ensemble_service import EnsembleService

logger = structlog.get_logger()

# ids above this offset never collide with the ensemble ids 0..n_paths-1
SECOND_ENSEMBLE_OFFSET = 1 << 32
REFERENCE_TRAJECTORY_ID = 1 << 48
REFERENCE_HORIZON_FACTOR = 10.0
GAP_FLOOR = 1e-300


class ErgodicService:
    """Monte Carlo estimates of the long-time behaviour of a problem."""

    def __init__(self, ensemble: Optional[EnsembleService] = None):
        self.ensemble = ensemble or EnsembleService()

    def _pool(self, seed: Optional[int]) -> EnsembleService:
        if seed is None or seed == self.ensemble.master_seed:
            return self.ensemble
        return EnsembleService(threads=self.ensemble.threads, master_seed=seed)

    def _observe(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        horizon: float,
        trajectory_id: int,
        master_seed: int,
        on_step: Callable[[int, Field], None],
        u0: Optional[Field] = None,
    ) -> None:
        simulate_trajectory(
            problem,
            cfg,
            horizon,
            trajectory_id,
            master_seed,
            record_states=False,
            observer=lambda step, _t, u, _k: on_step(step, u),
            u0=u0,
        )

    def coupling_decay(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        x: Field,
        y: Field,
        horizon: float,
        n_paths: int,
        seed: Optional[int] = None,
        thinning: int = 1,
    ) -> CouplingFit:
        """E ||u(t; x) - u(t; y)||_H^2 with both solutions driven by the same increments."""
        problem.check_admissible(x, "x")
        problem.check_admissible(y, "y")
        if thinning < 1:
            raise InvalidWindow(f"thinning must be >= 1, got {thinning}")
        pool = self._pool(seed)
        n_steps = step_count(horizon, cfg.dt)
        record = [i for i in range(n_steps + 1) if i % thinning == 0 or i == n_steps]
        index = {step: j for j, step in enumerate(record)}
        initial_sq_gap = norm_H(x - y) ** 2

        logger.info("Running coupling experiment", n_paths=n_paths, horizon=horizon)

        def run(trajectory_id: int) -> np.ndarray:
            states: dict[str, dict[int, np.ndarray]] = {"x": {}, "y": {}}
            for label, start in (("x", x), ("y", y)):
                bucket = states[label]

                def keep(step: int, u: Field, bucket: dict[int, np.ndarray] = bucket) -> None:
                    if step in index:
                        bucket[step] = u.flat.copy()

                self._observe(problem, cfg, horizon, trajectory_id, pool.master_seed, keep, u0=start)
            gaps = np.empty(len(record))
            for step, j in index.items():
                diff = states["x"][step] - states["y"][step]
                gaps[j] = problem.grid.cell_volume * float(np.dot(diff, diff))
            return gaps

        samples = np.array(pool.map(run, range(n_paths)))
        mean, stderr = ensemble_mean_series(samples)
        mean[0], stderr[0] = initial_sq_gap, 0.0
        times = np.array(record, dtype=float) * cfg.dt

        regime = classify_regime(problem)
        theoretical = 2.0 * regime.uniqueness_margin
        fit = fit_exponential(times, mean, floor=GAP_FLOOR)
        if fit is None:
            return CouplingFit(
                times=times,
                mean_sq_gap=mean,
                stderr=stderr,
                fitted_exponent=None,
                theoretical_exponent=theoretical,
                n_paths=n_paths,
                ci_halfwidth=None,
                initial_sq_gap=initial_sq_gap,
                status=FitStatus.DEGENERATE,
            )
        return CouplingFit(
            times=times,
            mean_sq_gap=mean,
            stderr=stderr,
            fitted_exponent=fit.slope,
            theoretical_exponent=theoretical,
            n_paths=n_paths,
            ci_halfwidth=1.96 * fit.slope_stderr,
            initial_sq_gap=initial_sq_gap,
        )

    def kb_average(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        functional: Functional,
        horizon: float,
        burn_in: float,
        n_paths: int,
        seed: Optional[int] = None,
        u0: Optional[Field] = None,
        label: str = "u0",
        id_offset: int = 0,
    ) -> ErgodicEstimate:
        """Per-path time average of phi(u) over (burn_in, horizon], then ensemble mean.

        Raises:
            InvalidWindow: burn_in < 0 or burn_in >= horizon
        """
        if not 0.0 <= burn_in < horizon:
            raise InvalidWindow(f"need 0 <= burn_in < horizon, got burn_in={burn_in}, horizon={horizon}")
        start = u0 if u0 is not None else problem.u0
        problem.check_admissible(start, "u0")
        pool = self._pool(seed)
        first = int(np.floor(burn_in / cfg.dt + 1e-9)) + 1
        p = problem.operator.p
        psi = problem.psi.flat

        def run(trajectory_id: int) -> tuple[float, float, float]:
            values: list[float] = []
            vp: list[float] = []
            min_gap = [np.inf]

            def accumulate(step: int, u: Field) -> None:
                if step < first:
                    return
                values.append(functional(u))
                vp.append(norm_Vp_power(u, p))
                min_gap[0] = min(min_gap[0], float(np.min(u.flat - psi)))

            self._observe(problem, cfg, horizon, trajectory_id, pool.master_seed, accumulate, u0=start)
            return float(np.mean(values)), float(np.mean(vp)), min_gap[0]

        ids = [id_offset + i for i in range(n_paths)]
        results = pool.map(run, ids)
        per_path = np.array([r[0] for r in results])
        mean, stderr = ensemble_mean(per_path)
        return ErgodicEstimate(
            functional=functional.name,
            horizon=horizon,
            burn_in=burn_in,
            kb_average=mean,
            stderr=stderr,
            n_paths=n_paths,
            per_path=per_path,
            label=label,
            min_gap=float(min(r[2] for r in results)),
            mean_Vp_power=float(np.mean([r[1] for r in results])),
        )

    def ergodic_agreement(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        functional: Functional,
        horizon: float,
        burn_in: float,
        n_paths: int,
        second_u0: Field,
        seed: Optional[int] = None,
    ) -> ErgodicAgreement:
        """kb_average from u0 and from ``second_u0`` on independent noise."""
        first = self.kb_average(problem, cfg, functional, horizon, burn_in, n_paths, seed)
        second = self.kb_average(
            problem,
            cfg,
            functional,
            horizon,
            burn_in,
            n_paths,
            seed,
            u0=second_u0,
            label="second_u0",
            id_offset=SECOND_ENSEMBLE_OFFSET,
        )
        return ErgodicAgreement(first=first, second=second)

    def equilibrium_gap(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        functional: Functional,
        x: Field,
        times: Sequence[float],
        n_paths: int,
        seed: Optional[int] = None,
    ) -> EquilibriumReport:
        """|P_t phi(x) - mu(phi)| with mu(phi) from one long run over [T, 10 T].

        Raises:
            InvalidWindow: times empty, not increasing, or not multiples of dt
        """
        times = np.asarray(times, dtype=float)
        if times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
            raise InvalidWindow("equilibrium times must be nonnegative and strictly increasing")
        problem.check_admissible(x, "x")
        steps = [step_count(t, cfg.dt) for t in times]
        position = {step: j for j, step in enumerate(steps)}
        fit_window = float(times[-1])
        pool = self._pool(seed)

        regime = classify_regime(problem)
        if not regime.uniqueness:
            logger.warning("Equilibrium gap outside the certified uniqueness regime", margin=regime.uniqueness_margin)

        def run(trajectory_id: int) -> np.ndarray:
            out = np.empty(len(steps))

            def sample(step: int, u: Field) -> None:
                if step in position:
                    out[position[step]] = functional(u)

            self._observe(problem, cfg, fit_window, trajectory_id, pool.master_seed, sample, u0=x)
            return out

        values, stderr = ensemble_mean_series(np.array(pool.map(run, range(n_paths))))

        series: list[float] = []
        fit_steps = step_count(fit_window, cfg.dt)
        first_reference = fit_steps + 1

        def collect(step: int, u: Field) -> None:
            if step >= first_reference:
                series.append(functional(u))

        reference_steps = max(int(np.ceil(REFERENCE_HORIZON_FACTOR * fit_steps)), fit_steps + 1)
        reference_horizon = reference_steps * cfg.dt
        self._observe(problem, cfg, reference_horizon, REFERENCE_TRAJECTORY_ID, pool.master_seed, collect)
        reference = float(np.mean(series))
        reference_stderr = batch_means_stderr(np.array(series))

        report = EquilibriumReport(
            functional=functional.name,
            times=times,
            values=values,
            stderr=stderr,
            reference=reference,
            reference_stderr=reference_stderr,
            fitted_exponent=None,
            theoretical_exponent=regime.uniqueness_margin,
            status=FitStatus.SIGNAL_BELOW_NOISE,
            uniqueness_certified=regime.uniqueness,
            n_paths=n_paths,
        )
        above = report.resolved
        fit = fit_exponential(times[above], report.gaps[above], floor=GAP_FLOOR) if above.sum() >= 2 else None
        if fit is None:
            logger.warning("Equilibrium gap below noise", points_above=int(above.sum()))
            return report
        report.fitted_exponent = fit.slope
        report.status = FitStatus.FITTED
        return report

    def tightness_scan(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        horizons: Sequence[float],
        n_paths: int,
        seed: Optional[int] = None,
        burn_in: float = 0.0,
    ) -> TightnessTable:
        """Running averages of E ||u||_V^p over (burn_in, t] for each horizon t.

        Raises:
            InvalidWindow: horizons not strictly increasing or not past burn_in
        """
        horizons = np.asarray(horizons, dtype=float)
        if horizons.size == 0 or np.any(np.diff(horizons) <= 0) or horizons[0] <= burn_in:
            raise InvalidWindow("horizons must be strictly increasing and exceed burn_in")
        ends = [step_count(t, cfg.dt) for t in horizons]
        first = int(np.floor(burn_in / cfg.dt + 1e-9)) + 1
        p = problem.operator.p
        pool = self._pool(seed)

        def run(trajectory_id: int) -> np.ndarray:
            values = np.zeros(ends[-1] + 1)

            def record(step: int, u: Field) -> None:
                values[step] = norm_Vp_power(u, p)

            self._observe(problem, cfg, float(horizons[-1]), trajectory_id, pool.master_seed, record)
            return np.array([np.mean(values[first : end + 1]) for end in ends])

        averages, stderr = ensemble_mean_series(np.array(pool.map(run, range(n_paths))))
        return TightnessTable(horizons=horizons, averages=averages, stderr=stderr, burn_in=burn_in)

    def time_shift_check(
        self,
        problem: ProblemSpec,
        cfg: StepConfig,
        functional: Functional,
        t0: float,
        shifts: Sequence[float],
        n_paths: int,
        seed: Optional[int] = None,
    ) -> TimeShiftReport:
        """Compare phi(u(t0 + s)) with phi(u(s)) restarted from the time-t0 states."""
        shifts = np.asarray(shifts, dtype=float)
        if shifts.size == 0 or np.any(shifts <= 0):
            raise InvalidWindow("shifts must be positive")
        t0_step = step_count(t0, cfg.dt)
        shift_steps = [step_count(s, cfg.dt) for s in shifts]
        total = (t0_step + max(shift_steps)) * cfg.dt
        pool = self._pool(seed)

        def run(trajectory_id: int) -> tuple[np.ndarray, np.ndarray]:
            shifted = np.empty(len(shift_steps))
            restart: dict[str, Field] = {}
            wanted = {t0_step + s: j for j, s in enumerate(shift_steps)}

            def first_leg(step: int, u: Field) -> None:
                if step == t0_step:
                    restart["u"] = u
                if step in wanted:
                    shifted[wanted[step]] = functional(u)

            self._observe(problem, cfg, total, trajectory_id, pool.master_seed, first_leg)

            restarted = np.empty(len(shift_steps))
            positions = {s: j for j, s in enumerate(shift_steps)}

            def second_leg(step: int, u: Field) -> None:
                if step in positions:
                    restarted[positions[step]] = functional(u)

            self._observe(
                problem,
                cfg,
                max(shift_steps) * cfg.dt,
                SECOND_ENSEMBLE_OFFSET + trajectory_id,
                pool.master_seed,
                second_leg,
                u0=restart["u"],
            )
            return shifted, restarted

        results = pool.map(run, range(n_paths))
        shifted, shifted_err = ensemble_mean_series(np.array([r[0] for r in results]))
        restarted, restarted_err = ensemble_mean_series(np.array([r[1] for r in results]))
        return TimeShiftReport(
            functional=functional.name,
            t0=t0,
            shifts=shifts,
            shifted=shifted,
            restarted=restarted,
            stderr=np.hypot(shifted_err, restarted_err),
        )
