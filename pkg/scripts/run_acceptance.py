#!/usr/bin/env python3
"""Desk-scale acceptance suite: one line per criterion, non-zero exit on any failure."""

import argparse
import sys
import time
from collections.abc import Callable
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.cli.presets import build_problem, build_step_config, preset  # noqa: E402
from src.core.ergodic import Existence, FitStatus, build_functional, classify_regime  # noqa: E402
from src.core.grid import Field, build_grid  # noqa: E402
from src.core.noise import NoiseIncrement, NoiseSpec  # noqa: E402
from src.core.operators import OperatorSpec  # noqa: E402
from src.core.problem import ProblemSpec  # noqa: E402
from src.core.stepper import StepConfig, semi_implicit_step, simulate_trajectory, vi_reference_step  # noqa: E402
from src.infrastructure.storage import render_csv  # noqa: E402
from src.schemas.experiment import ScenarioConfig  # noqa: E402
from src.services import (  # noqa: E402
    CertificationService,
    EnsembleService,
    ErgodicService,
    PenalizationService,
)
from src.utils.helpers import format_duration  # noqa: E402
from src.utils.logging import setup_logging  # noqa: E402

SEED = 20240601
EPSILONS = [1e-2, 1e-3, 1e-4, 1e-5]

Criterion = Callable[[EnsembleService], tuple[bool, str]]


def operator_certification(_pool: EnsembleService) -> tuple[bool, str]:
    rows = CertificationService().run_operator_suite([1.5, 2.0, 3.0], [-1.0, 0.0, 2.0], 1000, SEED)
    worst = min(min(r.t_monotone_slack, r.coercivity_slack) for r in rows)
    deviation = max(r.gradient_deviation for r in rows)
    return all(r.passed for r in rows), f"worst_slack={worst:.3e} gradient_dev={deviation:.3e}"


def stationary_exactness(_pool: EnsembleService) -> tuple[bool, str]:
    problem, cfg = preset("stationary")
    worst = {"u": 0.0, "k": 0.0}
    psi = problem.psi.flat

    def watch(_step: int, _t: float, u: Field, k: Field) -> None:
        worst["u"] = max(worst["u"], float(np.max(np.abs(u.flat - psi))))
        worst["k"] = max(worst["k"], k.sup_norm())

    simulate_trajectory(problem, cfg, 100.0, 0, SEED, record_states=False, observer=watch)
    return worst["u"] <= 1e-9 and worst["k"] <= 1e-9, f"sup|u-psi|={worst['u']:.3e} sup|k|={worst['k']:.3e}"


def vi_oracle_equivalence(_pool: EnsembleService) -> tuple[bool, str]:
    grid = build_grid(1, 16)
    ops = OperatorSpec(p=2.0)
    psi = Field.zeros(grid)
    f = Field.constant(grid, -20.0)
    u_n = Field.constant(grid, 0.05)
    cfg = StepConfig.for_operator(ops, dt=0.01, epsilon=1e-8)
    noise = NoiseSpec()
    penalized = semi_implicit_step(ops, noise, cfg, psi, f, u_n, NoiseIncrement.zero(noise, cfg.dt)).u_next
    exact = vi_reference_step(ops, cfg, psi, f, u_n, Field.zeros(grid))
    gap = (penalized - exact).sup_norm()
    return gap <= 1e-5, f"sup_gap={gap:.3e}"


def _rate_problem(p: float) -> ProblemSpec:
    return build_problem(ScenarioConfig(preset="ls-regular", p=p))


def penalization_rate_p2(pool: EnsembleService) -> tuple[bool, str]:
    problem = _rate_problem(2.0)
    cfg = build_step_config(problem.operator)
    study = PenalizationService(pool).penalization_rate_study(problem, cfg, EPSILONS, 1.0, 32)
    slope = study.fitted_slope if study.fitted_slope is not None else float("nan")
    passed = study.status == FitStatus.FITTED and slope >= 0.8 and study.strictly_decreasing
    return passed, f"slope={slope:.3f} theory={study.theoretical_slope}"


def penalization_rate_p15(pool: EnsembleService) -> tuple[bool, str]:
    service = PenalizationService(pool)
    reference_problem = _rate_problem(2.0)
    reference = service.penalization_rate_study(
        reference_problem, build_step_config(reference_problem.operator), EPSILONS, 1.0, 32
    )
    problem = _rate_problem(1.5)
    study = service.penalization_rate_study(problem, build_step_config(problem.operator), EPSILONS, 1.0, 32)
    slope = study.fitted_slope if study.fitted_slope is not None else float("nan")
    below = bool(np.all(study.errors <= reference.errors))
    passed = study.status == FitStatus.FITTED and slope >= 0.8 and below
    return passed, f"slope={slope:.3f} theory={study.theoretical_slope} below_p2={below}"


def feller_contraction(pool: EnsembleService) -> tuple[bool, str]:
    problem, cfg = preset("example-p2-unique")
    fit = ErgodicService(pool).coupling_decay(
        problem, cfg, problem.psi + 1.0, problem.psi, 2.0, 64, thinning=10
    )
    exponent = fit.fitted_exponent if fit.fitted_exponent is not None else float("nan")
    passed = fit.feller_bound_holds and exponent <= fit.theoretical_exponent + 0.3
    return passed, f"fitted={exponent:.3f} theory={fit.theoretical_exponent}"


def lewy_stampacchia(pool: EnsembleService) -> tuple[bool, str]:
    problem, cfg = preset("ls-regular")
    tol = 0.05 * problem.compatibility.h_minus_sup
    report = PenalizationService(pool).ls_check(problem, cfg, 2.0, 8, tol=tol)
    return report.passed, f"lower={report.max_violation_lower:.3e} upper={report.max_violation_upper:.3e}"


def kb_tightness(pool: EnsembleService) -> tuple[bool, str]:
    problem, cfg = preset("example-p3")
    table = ErgodicService(pool).tightness_scan(problem, cfg, [10.0, 20.0, 40.0], 8, burn_in=5.0)
    return table.spread <= 1.5, f"spread={table.spread:.3f}"


def ergodic_uniqueness(pool: EnsembleService) -> tuple[bool, str]:
    problem, cfg = preset("example-p2-unique")
    functional = build_functional("clipped_h_norm", problem.psi)
    agreement = ErgodicService(pool).ergodic_agreement(
        problem, cfg, functional, 50.0, 10.0, 16, problem.psi + 1.0
    )
    return agreement.passed, (
        f"difference={agreement.difference:.3e} joint_stderr={agreement.joint_stderr:.3e} "
        f"relative={agreement.relative_gap:.3%}"
    )


def mixing_rate(pool: EnsembleService) -> tuple[bool, str]:
    problem, cfg = preset("example-p2-unique")
    functional = build_functional("clipped_h_norm", problem.psi)
    times = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    report = ErgodicService(pool).equilibrium_gap(problem, cfg, functional, problem.psi + 1.0, times, 64)
    if report.status == FitStatus.SIGNAL_BELOW_NOISE:
        late = report.times >= 1.0
        quiet = bool(np.all(report.gaps[late] <= 3.0 * report.gap_stderr[late]))
        return quiet, f"status={report.status.value}"
    exponent = report.fitted_exponent if report.fitted_exponent is not None else float("nan")
    return exponent <= report.theoretical_exponent + 0.3, f"fitted={exponent:.3f} theory={report.theoretical_exponent}"


def regime_vectors(_pool: EnsembleService) -> tuple[bool, str]:
    expected = {
        "example-p3": (Existence.ERGODIC_INVARIANT, False),
        "example-p3-unique": (Existence.ERGODIC_INVARIANT, True),
        "example-p2-unique": (Existence.ERGODIC_INVARIANT, True),
        "example-p15-unique": (Existence.ERGODIC_INVARIANT, True),
    }
    misses = []
    for name, (existence, unique) in expected.items():
        problem, _ = preset(name)
        report = classify_regime(problem)
        if report.existence != existence or report.uniqueness != unique or report.example_holds != unique:
            misses.append(name)
    return not misses, f"mismatches={misses}"


def determinism(_pool: EnsembleService) -> tuple[bool, str]:
    problem, cfg = preset("example-p2-unique")
    bodies = []
    for threads in (1, 4):
        fit = ErgodicService(EnsembleService(threads=threads, master_seed=SEED)).coupling_decay(
            problem, cfg, problem.psi + 1.0, problem.psi, 0.5, 8, thinning=5
        )
        bodies.append(render_csv(fit.table()))
    return bodies[0] == bodies[1], f"threads=1 vs 4 identical={bodies[0] == bodies[1]}"


CRITERIA: list[tuple[str, Criterion]] = [
    ("operator-certification", operator_certification),
    ("stationary-exactness", stationary_exactness),
    ("vi-oracle-equivalence", vi_oracle_equivalence),
    ("penalization-rate-p2", penalization_rate_p2),
    ("penalization-rate-p15", penalization_rate_p15),
    ("feller-contraction", feller_contraction),
    ("lewy-stampacchia", lewy_stampacchia),
    ("kb-tightness", kb_tightness),
    ("ergodic-uniqueness", ergodic_uniqueness),
    ("mixing-rate", mixing_rate),
    ("regime-vectors", regime_vectors),
    ("determinism", determinism),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--only", nargs="*", default=None, help="criterion names to run")
    args = parser.parse_args()
    setup_logging("WARNING")

    pool = EnsembleService(threads=args.threads, master_seed=SEED)
    failures = 0
    for index, (name, criterion) in enumerate(CRITERIA, start=1):
        if args.only and name not in args.only:
            continue
        started = time.perf_counter()
        passed, detail = criterion(pool)
        failures += not passed
        status = "PASS" if passed else "FAIL"
        print(f"{index:2d} {status} {name} {detail} ({format_duration(time.perf_counter() - started)})")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
