"""Command implementations: each turns a validated config into a table and a summary."""

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import structlog

from src.cli.presets import build_field, build_problem, build_step_config
from src.core.ergodic import FitStatus, build_functional, classify_regime
from src.core.noise import NoiseKind, NoiseSpec
from src.core.problem import ProblemSpec
from src.core.stepper import StepConfig, simulate_trajectory, trajectory_summary
from src.schemas.experiment import ExperimentConfig, FunctionalConfig
from src.services import CertificationService, EnsembleService, ErgodicService, PenalizationService

logger = structlog.get_logger()

MIXING_SLACK = 0.3
QUIET_AFTER = 1.0
LS_RELATIVE_TOL = 0.05
LS_FLOOR_TOL = 1e-8


@dataclass
class CommandResult:
    """Table rows, JSON summary and the acceptance flag (None when nothing is asserted)."""

    command: str
    rows: list[dict[str, Any]]
    summary: dict[str, Any]
    passed: Optional[bool] = None
    notes: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.passed is None:
            return "DONE"
        return "PASS" if self.passed else "FAIL"

    def summary_line(self) -> str:
        extra = " ".join(self.notes)
        return f"{self.status} {self.command}" + (f" {extra}" if extra else "")


@dataclass
class RunContext:
    """Everything a command needs, resolved once from the config."""

    config: ExperimentConfig
    problem: ProblemSpec
    step: StepConfig
    ensemble: EnsembleService

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "RunContext":
        problem = build_problem(config.scenario)
        step = build_step_config(problem.operator, config.step)
        ensemble = EnsembleService(threads=config.threads, master_seed=config.master_seed)
        return cls(config=config, problem=problem, step=step, ensemble=ensemble)

    def base_summary(self) -> dict[str, Any]:
        return {
            "config": self.config.model_dump(mode="json"),
            "master_seed": self.config.master_seed,
            "problem": self.problem.to_dict(),
            "step": self.step.to_dict(),
            "delta_reg": self.problem.operator.reg,
        }

    def functional(self, block: FunctionalConfig) -> Any:
        return build_functional(block.functional, self.problem.psi, bound=block.bound, scale=block.scale)


def run_simulate(ctx: RunContext) -> CommandResult:
    block = ctx.config.simulate
    trajectory = simulate_trajectory(
        ctx.problem,
        ctx.step,
        block.horizon,
        block.trajectory_id,
        ctx.config.master_seed,
        thinning=block.thinning,
        solver=block.solver,
    )
    rows = trajectory_summary(trajectory, ctx.problem)
    summary = {
        **ctx.base_summary(),
        "records": len(trajectory),
        "total_newton_iters": trajectory.total_newton_iters,
        "max_residual": trajectory.max_residual,
    }
    return CommandResult("simulate", rows, summary, notes=[f"records={len(trajectory)}"])


def run_coupling(ctx: RunContext) -> CommandResult:
    block = ctx.config.coupling
    psi = ctx.problem.psi
    x = build_field(block.x, ctx.problem.grid, psi=psi, ops=ctx.problem.operator)
    y = build_field(block.y, ctx.problem.grid, psi=psi, ops=ctx.problem.operator)
    fit = ErgodicService(ctx.ensemble).coupling_decay(
        ctx.problem, ctx.step, x, y, block.horizon, block.n_paths, thinning=block.thinning
    )
    rate_ok = fit.fitted_exponent is None or fit.fitted_exponent <= fit.theoretical_exponent + MIXING_SLACK
    summary = {**ctx.base_summary(), **fit.to_dict()}
    return CommandResult(
        "coupling",
        fit.table(),
        summary,
        passed=fit.feller_bound_holds and rate_ok,
        notes=[f"fitted={fit.fitted_exponent}", f"theory={fit.theoretical_exponent}"],
    )


def run_ergodic(ctx: RunContext) -> CommandResult:
    block = ctx.config.ergodic
    second = build_field(block.second_u0, ctx.problem.grid, psi=ctx.problem.psi, ops=ctx.problem.operator)
    regime = classify_regime(ctx.problem)
    agreement = ErgodicService(ctx.ensemble).ergodic_agreement(
        ctx.problem,
        ctx.step,
        ctx.functional(block),
        block.horizon,
        block.burn_in,
        block.n_paths,
        second,
    )
    summary = {**ctx.base_summary(), **agreement.to_dict(), "uniqueness_certified": regime.uniqueness}
    # agreement is only expected where uniqueness is certified
    passed = agreement.passed if regime.uniqueness else None
    return CommandResult(
        "ergodic",
        agreement.table(),
        summary,
        passed=passed,
        notes=[f"difference={agreement.difference:.6g}", f"joint_stderr={agreement.joint_stderr:.6g}"],
    )


def run_equilibrium(ctx: RunContext) -> CommandResult:
    block = ctx.config.equilibrium
    x = build_field(block.x, ctx.problem.grid, psi=ctx.problem.psi, ops=ctx.problem.operator)
    report = ErgodicService(ctx.ensemble).equilibrium_gap(
        ctx.problem, ctx.step, ctx.functional(block), x, block.times, block.n_paths
    )
    if report.status == FitStatus.SIGNAL_BELOW_NOISE:
        late = report.times >= QUIET_AFTER
        passed = not bool(np.any(report.resolved[late]))
    else:
        passed = report.fitted_exponent is not None and (
            report.fitted_exponent <= report.theoretical_exponent + MIXING_SLACK
        )
    summary = {**ctx.base_summary(), **report.to_dict()}
    return CommandResult(
        "equilibrium",
        report.table(),
        summary,
        passed=passed,
        notes=[f"status={report.status.value}", f"fitted={report.fitted_exponent}"],
    )


def run_tightness(ctx: RunContext) -> CommandResult:
    block = ctx.config.tightness
    table = ErgodicService(ctx.ensemble).tightness_scan(
        ctx.problem, ctx.step, block.horizons, block.n_paths, burn_in=block.burn_in
    )
    summary = {**ctx.base_summary(), **table.to_dict(), "max_spread": block.max_spread}
    return CommandResult(
        "tightness",
        table.table(),
        summary,
        passed=table.spread <= block.max_spread,
        notes=[f"spread={table.spread:.6g}"],
    )


def run_ls_check(ctx: RunContext) -> CommandResult:
    block = ctx.config.ls_check
    h_minus_sup = ctx.problem.compatibility.h_minus_sup
    tol = block.tol
    if tol is None:
        tol = LS_RELATIVE_TOL * h_minus_sup if h_minus_sup > 0 else LS_FLOOR_TOL
    report = PenalizationService(ctx.ensemble).ls_check(
        ctx.problem, ctx.step, block.horizon, block.n_paths, tol=tol
    )
    summary = {**ctx.base_summary(), **report.to_dict()}
    return CommandResult(
        "ls-check",
        report.table(),
        summary,
        passed=report.passed,
        notes=[f"upper={report.max_violation_upper:.6g}", f"lower={report.max_violation_lower:.6g}"],
    )


def run_rate_study(ctx: RunContext) -> CommandResult:
    block = ctx.config.rate_study
    study = PenalizationService(ctx.ensemble).penalization_rate_study(
        ctx.problem, ctx.step, block.epsilons, block.horizon, block.n_paths
    )
    passed: Optional[bool] = None
    if study.status == FitStatus.FITTED and study.fitted_slope is not None:
        passed = study.fitted_slope >= block.min_slope and study.strictly_decreasing
    summary = {**ctx.base_summary(), **study.to_dict(), "min_slope": block.min_slope}
    return CommandResult(
        "rate-study",
        study.table(),
        summary,
        passed=passed,
        notes=[f"slope={study.fitted_slope}", f"theory={study.theoretical_slope}"],
    )


def run_classify(ctx: RunContext) -> CommandResult:
    report = classify_regime(ctx.problem, delta=ctx.config.classify.delta)
    summary = {**ctx.base_summary(), **report.to_dict()}
    return CommandResult(
        "classify",
        report.table(),
        summary,
        notes=[f"existence={report.existence.value}", f"uniqueness={report.uniqueness}"],
    )


def run_op_check(ctx: RunContext) -> CommandResult:
    block = ctx.config.op_check
    service = CertificationService()
    seed = ctx.config.master_seed % (2**63)
    operators = service.run_operator_suite(block.p_values, block.kappa_values, block.trials, seed)
    noises = service.run_noise_suite(
        [
            NoiseSpec(kind=NoiseKind.SCALAR, c=block.noise_c),
            NoiseSpec(kind=NoiseKind.MULTI_MODE, c=block.noise_c, modes=16),
            NoiseSpec(kind=NoiseKind.BOUNDED_MULTI_MODE, c=block.noise_c, modes=16, clip=1.0),
        ],
        block.trials,
        seed,
    )
    passed = all(r.passed for r in operators) and all(r.passed for r in noises)
    summary = {
        **ctx.base_summary(),
        "operators": [r.to_dict() for r in operators],
        "noise": [r.to_dict() for r in noises],
        "passed": passed,
    }
    failed = sum(not r.passed for r in operators) + sum(not r.passed for r in noises)
    return CommandResult(
        "op-check",
        [r.to_dict() for r in operators],
        summary,
        passed=passed,
        notes=[f"cases={len(operators) + len(noises)}", f"failed={failed}"],
    )


COMMANDS: dict[str, Callable[[RunContext], CommandResult]] = {
    "simulate": run_simulate,
    "coupling": run_coupling,
    "ergodic": run_ergodic,
    "equilibrium": run_equilibrium,
    "tightness": run_tightness,
    "ls-check": run_ls_check,
    "rate-study": run_rate_study,
    "classify": run_classify,
    "op-check": run_op_check,
}


def run_command(command: str, config: ExperimentConfig) -> CommandResult:
    """Resolve the problem for ``config`` and run ``command`` on it."""
    ctx = RunContext.from_config(config)
    logger.info(
        "Running command",
        command=command,
        problem=ctx.problem.name,
        master_seed=config.master_seed,
        threads=ctx.ensemble.threads,
    )
    return COMMANDS[command](ctx)
