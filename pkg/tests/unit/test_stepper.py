"""Tests for the implicit step, the exact obstacle step and trajectories."""

import numpy as np
import pytest

from src.core.exceptions import (
    ConstraintViolated,
    InvalidDt,
    InvalidExponent,
    InvalidWindow,
    MonotonicityMarginViolated,
    NewtonDiverged,
    StepFailed,
)
from src.core.grid import Field, Grid, build_grid
from src.core.noise import NoiseIncrement, NoiseSpec
from src.core.operators import OperatorSpec
from src.core.stepper import (
    SolverKind,
    StepConfig,
    semi_implicit_step,
    simulate_trajectory,
    step_count,
    trajectory_summary,
    vi_multiplier,
    vi_reference_step,
)
from src.core.stepper.newton import ImplicitSystem, step_rhs


class TestStepConfig:
    """Tests for StepConfig validation."""

    def test_rejects_nonpositive_dt(self):
        """Test dt must be positive."""
        with pytest.raises(InvalidDt):
            StepConfig(dt=0.0, epsilon=1e-3)

    def test_q_tilde_follows_operator(self):
        """Test for_operator picks q_tilde = min(p, 2)."""
        assert StepConfig.for_operator(OperatorSpec(p=1.5), 0.01, 1e-3).q_tilde == 1.5
        assert StepConfig.for_operator(OperatorSpec(p=3.0), 0.01, 1e-3).q_tilde == 2.0

    def test_mismatched_q_tilde_rejected(self):
        """Test a q_tilde that differs from min(p, 2) is refused."""
        with pytest.raises(InvalidExponent):
            StepConfig(dt=0.01, epsilon=1e-3, q_tilde=2.0).validate_against(OperatorSpec(p=1.5))

    def test_monotonicity_margin(self):
        """Test dt (max(0, -kappa) + max(0, -gamma)) >= 1 is refused."""
        ops = OperatorSpec(p=2.0, kappa=-200.0)
        with pytest.raises(MonotonicityMarginViolated):
            StepConfig.for_operator(ops, 0.01, 1e-3)
        assert StepConfig(dt=0.001, epsilon=1e-3).monotonicity_margin(ops) == pytest.approx(0.8)


class TestSemiImplicitStep:
    """Tests for one penalized step on a single node, where A(u) = 8 u."""

    def _step(self, grid: Grid, psi_value: float, epsilon: float):
        cfg = StepConfig(dt=0.1, epsilon=epsilon)
        noise = NoiseSpec(c=0.0)
        return semi_implicit_step(
            OperatorSpec(p=2.0),
            noise,
            cfg,
            Field.constant(grid, psi_value),
            Field.zeros(grid),
            Field.constant(grid, 1.0),
            NoiseIncrement.zero(noise, cfg.dt),
        )

    def test_inactive_obstacle(self, single_node_grid: Grid):
        """Test v = 1/1.8 and k = 0 when the obstacle is far below."""
        result = self._step(single_node_grid, -10.0, 1e-3)
        assert result.u_next.values[0] == pytest.approx(1.0 / 1.8, rel=1e-10)
        assert result.multiplier.values[0] == 0.0

    def test_active_obstacle(self, single_node_grid: Grid):
        """Test v -> 0.8 and k -> -4.4 as eps -> 0."""
        result = self._step(single_node_grid, 0.8, 1e-6)
        assert result.u_next.values[0] == pytest.approx(0.8, abs=1e-5)
        assert result.multiplier.values[0] == pytest.approx(-4.4, rel=1e-4)

    def test_multiplier_nonpositive(self, single_node_grid: Grid):
        """Test the multiplier is never positive."""
        for psi_value in (-1.0, 0.3, 0.8, 2.0):
            assert self._step(single_node_grid, psi_value, 1e-2).multiplier.values[0] <= 0.0

    def test_stationary_state_is_kept(self, stationary_problem, step_config: StepConfig):
        """Test u_n = psi with f = A(psi) is a fixed point."""
        p = stationary_problem
        inc = NoiseIncrement(dt=step_config.dt, betas=np.array([0.7]))
        result = semi_implicit_step(p.operator, p.noise, step_config, p.psi, p.f, p.u0, inc)
        assert result.u_next.allclose(p.psi)
        assert result.newton_iters == 0

    def test_newton_budget_exhausted(self, make_problem):
        """Test NewtonDiverged when the iteration budget cannot reach tol."""
        problem = make_problem(p=3.0)
        cfg = StepConfig(dt=0.01, epsilon=1e-3, newton_tol=1e-14, newton_max_iters=1)
        with pytest.raises(NewtonDiverged):
            semi_implicit_step(
                problem.operator,
                problem.noise,
                cfg,
                problem.psi,
                problem.f,
                problem.u0,
                NoiseIncrement.zero(problem.noise, cfg.dt),
            )

    def test_reported_residual_is_raw_and_within_tol(self, make_problem, grid_1d: Grid):
        """Test StepResult.residual is the sup norm of the step residual and below newton_tol."""
        problem = make_problem(p=3.0, psi=Field.constant(grid_1d, 0.3), c=0.5)
        cfg = StepConfig(dt=0.01, epsilon=1e-4)
        inc = NoiseIncrement(dt=cfg.dt, betas=np.array([-0.2]))
        result = semi_implicit_step(problem.operator, problem.noise, cfg, problem.psi, problem.f, problem.u0, inc)
        rhs = step_rhs(problem.noise, cfg, problem.psi, problem.f, problem.u0, inc)
        raw = np.max(np.abs(ImplicitSystem(problem.operator, cfg, problem.psi, rhs).residual(result.u_next.flat)))
        assert result.residual <= cfg.newton_tol
        assert result.residual == pytest.approx(raw, rel=0.0, abs=1e-15)

    def test_tiny_epsilon_on_fine_grid(self):
        """Test eps = 1e-8 on 64 nodes converges in a few iterations and matches the exact step."""
        grid = build_grid(1, 64)
        ops = OperatorSpec(p=2.0)
        cfg = StepConfig(dt=0.01, epsilon=1e-8)
        noise = NoiseSpec(c=0.0)
        psi = Field.zeros(grid)
        f = Field.constant(grid, -20.0)
        u_n = Field.constant(grid, 0.05)
        result = semi_implicit_step(ops, noise, cfg, psi, f, u_n, NoiseIncrement.zero(noise, cfg.dt))
        assert result.residual <= cfg.newton_tol
        assert result.newton_iters <= 6
        exact = vi_reference_step(ops, cfg, psi, f, u_n, Field.zeros(grid))
        assert np.allclose(result.u_next.values, exact.values, atol=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_rough_data_below_two(self, seed: int):
        """Test p = 1.5 converges on rough obstacles and forcing from random starts."""
        rng = np.random.default_rng(seed)
        grid = build_grid(1, 32)
        ops = OperatorSpec(p=1.5, kappa=0.5)
        # contact nodes grazing the obstacle raise the q < 2 rounding floor above 1e-10
        cfg = StepConfig.for_operator(ops, 0.01, 1e-4, newton_tol=1e-8)
        noise = NoiseSpec(c=0.0)
        psi = Field(grid, 0.1 * rng.standard_normal(grid.dof))
        f = Field(grid, rng.standard_normal(grid.dof))
        u_n = psi + Field(grid, 0.2 * np.abs(rng.standard_normal(grid.dof)))
        result = semi_implicit_step(ops, noise, cfg, psi, f, u_n, NoiseIncrement.zero(noise, cfg.dt))
        assert result.residual <= cfg.newton_tol
        assert np.all(result.multiplier.values <= 0.0)

    @pytest.mark.parametrize("c", [0.0, 0.5])
    def test_order_preserved(self, make_problem, grid_1d: Grid, c: float):
        """Test u_n >= w_n nodally gives u_next >= w_next under a shared increment."""
        rng = np.random.default_rng(3)
        grid = grid_1d
        psi = Field(grid, 0.1 * rng.standard_normal(grid.dof))
        problem = make_problem(p=3.0, kappa=-1.0, c=c, psi=psi, u0=psi + 1.0)
        cfg = StepConfig.for_operator(problem.operator, 0.01, 1e-5)
        # 1 + c * beta stays positive, so the explicit part is order preserving too
        inc = NoiseIncrement(dt=cfg.dt, betas=np.array([0.3]))
        for _ in range(10):
            w_n = problem.psi + Field(grid, np.abs(rng.standard_normal(grid.dof)))
            u_n = w_n + Field(grid, np.abs(rng.standard_normal(grid.dof)))
            args = (problem.operator, problem.noise, cfg, problem.psi, problem.f)
            upper = semi_implicit_step(*args, u_n, inc).u_next
            lower = semi_implicit_step(*args, w_n, inc).u_next
            assert np.all(upper.values >= lower.values - 1e-9)


class TestVIStep:
    """Tests for the exact obstacle step."""

    def test_single_node_contact(self, single_node_grid: Grid):
        """Test v = psi and k = -4.4 on the hand-solved node."""
        cfg = StepConfig(dt=0.1, epsilon=1.0)
        ops = OperatorSpec(p=2.0)
        psi = Field.constant(single_node_grid, 0.8)
        f = Field.zeros(single_node_grid)
        u_n = Field.constant(single_node_grid, 1.0)
        zero = Field.zeros(single_node_grid)
        v = vi_reference_step(ops, cfg, psi, f, u_n, zero)
        assert v.values[0] == pytest.approx(0.8)
        k = vi_multiplier(ops, cfg, psi, f, u_n, zero, v)
        assert k.values[0] == pytest.approx(-4.4)

    def test_solvers_agree_for_p2(self, ls_problem, step_config: StepConfig):
        """Test active-set Newton and projected Gauss-Seidel give the same step."""
        p = ls_problem
        zero = Field.zeros(p.grid)
        newton = vi_reference_step(p.operator, step_config, p.psi, p.f, p.u0, zero)
        pgs = vi_reference_step(p.operator, step_config, p.psi, p.f, p.u0, zero, method="pgs")
        assert np.allclose(newton.values, pgs.values, atol=1e-8)
        assert np.all(newton.values >= p.psi.values)

    def test_pgs_needs_p2(self, make_problem, step_config: StepConfig):
        """Test projected Gauss-Seidel refuses p != 2."""
        p = make_problem(p=3.0)
        with pytest.raises(InvalidExponent):
            vi_reference_step(p.operator, step_config, p.psi, p.f, p.u0, Field.zeros(p.grid), method="pgs")

    def test_penalized_step_approaches_exact_step(self, ls_problem):
        """Test the penalized step is close to the exact one for tiny eps."""
        p = ls_problem
        cfg = StepConfig(dt=0.01, epsilon=1e-9)
        noise = NoiseSpec(c=0.0)
        exact = vi_reference_step(p.operator, cfg, p.psi, p.f, p.u0, Field.zeros(p.grid))
        penalized = semi_implicit_step(
            p.operator, noise, cfg, p.psi, p.f, p.u0, NoiseIncrement.zero(noise, cfg.dt)
        )
        assert np.allclose(penalized.u_next.values, exact.values, atol=1e-6)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_instance_matches_tiny_epsilon(self, seed: int):
        """Test the exact step agrees with the eps = 1e-8 penalized step on random 16-node data."""
        rng = np.random.default_rng(seed)
        grid = build_grid(1, 16)
        ops = OperatorSpec(p=2.0)
        cfg = StepConfig(dt=0.01, epsilon=1e-8)
        noise = NoiseSpec(c=0.0)
        psi = Field(grid, 0.1 * rng.standard_normal(grid.dof))
        f = Field(grid, 5.0 * rng.standard_normal(grid.dof))
        u_n = psi + Field(grid, 0.1 * np.abs(rng.standard_normal(grid.dof)))
        exact = vi_reference_step(ops, cfg, psi, f, u_n, Field.zeros(grid))
        penalized = semi_implicit_step(ops, noise, cfg, psi, f, u_n, NoiseIncrement.zero(noise, cfg.dt))
        assert np.max(np.abs(penalized.u_next.values - exact.values)) <= 1e-5


class TestTrajectory:
    """Tests for simulate_trajectory."""

    def test_step_count(self):
        """Test horizon must be an integer multiple of dt."""
        assert step_count(0.1, 0.01) == 10
        assert step_count(0.0, 0.01) == 0
        with pytest.raises(InvalidWindow):
            step_count(0.105, 0.01)
        with pytest.raises(InvalidWindow):
            step_count(-1.0, 0.01)

    def test_records_with_thinning(self, make_problem, step_config: StepConfig):
        """Test records at t = 0, every thinning steps and at the end."""
        trajectory = simulate_trajectory(make_problem(), step_config, 0.05, 0, 1, thinning=2)
        assert np.allclose(trajectory.times, [0.0, 0.02, 0.04, 0.05])

    def test_stationary_path_is_constant(self, stationary_problem, step_config: StepConfig):
        """Test the path started at psi with f = A(psi) never moves."""
        trajectory = simulate_trajectory(stationary_problem, step_config, 0.1, 0, 42)
        assert len(trajectory) == 11
        for state in trajectory.fields():
            assert state.allclose(stationary_problem.psi)

    def test_same_seed_same_path(self, make_problem, step_config: StepConfig):
        """Test trajectories are reproducible from (master_seed, trajectory_id)."""
        problem = make_problem(c=1.0)
        a = simulate_trajectory(problem, step_config, 0.05, 3, 99)
        b = simulate_trajectory(problem, step_config, 0.05, 3, 99)
        c = simulate_trajectory(problem, step_config, 0.05, 4, 99)
        assert np.array_equal(a.states, b.states)
        assert not np.array_equal(a.states, c.states)

    def test_observer_sees_every_step(self, make_problem, step_config: StepConfig):
        """Test the observer is called for the initial state and each step."""
        seen: list[int] = []
        trajectory = simulate_trajectory(
            make_problem(),
            step_config,
            0.05,
            0,
            1,
            record_states=False,
            observer=lambda step, t, u, k: seen.append(step),
        )
        assert seen == [0, 1, 2, 3, 4, 5]
        assert len(trajectory) == 2

    def test_paths_stay_above_obstacle_under_vi(self, ls_problem, step_config: StepConfig):
        """Test the exact obstacle path satisfies u >= psi with k <= 0."""
        trajectory = simulate_trajectory(ls_problem, step_config, 0.05, 0, 5, solver=SolverKind.VI)
        assert np.all(trajectory.states >= ls_problem.psi.flat - 1e-12)
        assert np.all(trajectory.multipliers <= 0.0)

    def test_step_failure_carries_index(self, make_problem):
        """Test solver failures are wrapped with the step index."""
        cfg = StepConfig(dt=0.01, epsilon=1e-3, newton_tol=1e-14, newton_max_iters=1)
        with pytest.raises(StepFailed) as info:
            simulate_trajectory(make_problem(p=3.0), cfg, 0.02, 7, 1)
        assert info.value.step_index == 1
        assert info.value.trajectory_id == 7

    def test_rejects_bad_thinning(self, make_problem, step_config: StepConfig):
        """Test thinning must be at least one."""
        with pytest.raises(InvalidWindow):
            simulate_trajectory(make_problem(), step_config, 0.05, 0, 1, thinning=0)

    def test_summary_rows(self, stationary_problem, step_config: StepConfig):
        """Test the summary has one row per record with a zero minimal gap."""
        trajectory = simulate_trajectory(stationary_problem, step_config, 0.03, 0, 1)
        rows = trajectory_summary(trajectory, stationary_problem)
        assert len(rows) == 4
        assert set(rows[0]) == {"t", "norm_H", "norm_Vp_power", "min_gap", "multiplier_sup"}
        assert all(row["min_gap"] == pytest.approx(0.0, abs=1e-12) for row in rows)

    def test_start_below_obstacle_rejected(self, ls_problem, step_config: StepConfig):
        """Test an explicit u0 under psi is refused like the problem's own u0."""
        with pytest.raises(ConstraintViolated):
            simulate_trajectory(ls_problem, step_config, 0.02, 0, 1, u0=ls_problem.psi - 1e-6)

    def test_start_override_is_used(self, ls_problem, step_config: StepConfig):
        """Test an admissible u0 override becomes the first recorded state."""
        start = ls_problem.psi + 2.0
        trajectory = simulate_trajectory(ls_problem, step_config, 0.02, 0, 1, u0=start)
        assert np.array_equal(trajectory.states[0], start.flat)
