"""Tests for the regime classifier, test functionals and rate fits."""

import numpy as np
import pytest

from src.cli.presets import preset
from src.core.ergodic import (
    Existence,
    FunctionalKind,
    PCase,
    admissible_exponent,
    batch_means_stderr,
    build_functional,
    classify_regime,
    default_bound,
    ensemble_mean,
    ensemble_mean_series,
    fit_exponential,
    fit_loglog,
)
from src.core.exceptions import InvariantViolation
from src.core.grid import Field, Grid, norm_H
from src.core.noise import NoiseKind, NoiseSpec
from src.core.problem import ProblemSpec


class TestClassifyRegime:
    """Tests for classify_regime on the named examples."""

    def test_p3_without_damping_is_not_unique(self):
        """Test kappa = 0, c = 1, p = 3 certifies existence only."""
        problem, _ = preset("example-p3")
        report = classify_regime(problem)
        assert report.p_case == PCase.GT2
        assert report.existence == Existence.ERGODIC_INVARIANT
        assert report.uniqueness is False
        assert report.uniqueness_margin == pytest.approx(0.5)
        assert report.example_holds is False

    @pytest.mark.parametrize(
        "name, margin",
        [("example-p3-unique", -0.5), ("example-p2-unique", -1.5), ("example-p15-unique", -2.5)],
    )
    def test_damped_examples_are_unique(self, name: str, margin: float):
        """Test the damped examples certify a unique ergodic measure."""
        problem, _ = preset(name)
        report = classify_regime(problem)
        assert report.existence == Existence.ERGODIC_INVARIANT
        assert report.uniqueness is True
        assert report.uniqueness_margin == pytest.approx(margin)
        assert report.example_holds is True

    def test_p2_boundary_case_counts(self):
        """Test the p = 2 example condition 2 L_G <= kappa accepts equality."""
        problem, _ = preset("example-p2-unique")
        assert classify_regime(problem).example_margin == pytest.approx(0.0)

    def test_p2_existence_from_coercivity(self, make_problem):
        """Test p = 2 without damping still certifies existence on a fine grid."""
        report = classify_regime(make_problem(p=2.0, c=1.0))
        assert report.existence == Existence.ERGODIC_INVARIANT
        assert report.uniqueness is False
        assert report.cond_invariant_slack > 0

    def test_singular_case_needs_damping_or_bounded_noise(self, make_problem, grid_1d: Grid):
        """Test p < 2 certifies nothing without damping, and invariance with clipped noise."""
        problem = make_problem(p=1.5, c=1.0)
        assert classify_regime(problem).existence == Existence.NONE_CERTIFIED
        bounded = ProblemSpec(
            grid=grid_1d,
            operator=problem.operator,
            noise=NoiseSpec(kind=NoiseKind.BOUNDED_MULTI_MODE, c=1.0, modes=4, clip=1.0),
            psi=problem.psi,
            f=problem.f,
            u0=problem.u0,
        )
        assert classify_regime(bounded).existence == Existence.INVARIANT

    def test_rejects_bad_delta(self, make_problem):
        """Test delta must lie strictly between 0 and 1."""
        with pytest.raises(InvariantViolation):
            classify_regime(make_problem(), delta=1.0)

    def test_slack_table_covers_k_grid(self, make_problem):
        """Test one table row per K value."""
        report = classify_regime(make_problem(c=1.0))
        rows = report.table()
        assert len(rows) == report.K_grid.size
        assert set(rows[0]) == {"K", "cond_invariant_slack", "gamma_condition_slack"}

    def test_admissible_exponent(self):
        """Test p > max(1, 2d/(d+2))."""
        assert admissible_exponent(1.2, 2)
        assert not admissible_exponent(1.0, 1)


class TestFunctionals:
    """Tests for the bounded test functionals."""

    def test_clipped_norm_saturates(self, grid_1d: Grid):
        """Test min(||u||_H, B)."""
        phi = build_functional("clipped_h_norm", Field.zeros(grid_1d), bound=1.0)
        assert phi(Field.constant(grid_1d, 100.0)) == 1.0
        small = Field.constant(grid_1d, 0.1)
        assert phi(small) == pytest.approx(norm_H(small))

    def test_default_bound(self, grid_1d: Grid):
        """Test B = 10 ||psi||_H + 10."""
        assert default_bound(Field.zeros(grid_1d)) == 10.0

    def test_mean_value(self, grid_1d: Grid):
        """Test h^d sum u_i for a constant."""
        phi = build_functional(FunctionalKind.MEAN_VALUE, Field.zeros(grid_1d))
        assert phi(Field.constant(grid_1d, 1.0)) == pytest.approx(8.0 / 9.0)

    def test_contact_fraction(self, grid_1d: Grid):
        """Test every node counts as contact when u = psi."""
        psi = Field.constant(grid_1d, 0.3)
        phi = build_functional("contact_fraction", psi)
        assert phi(psi) == 1.0
        assert phi(psi + 1.0) == 0.0

    def test_scale(self, grid_1d: Grid):
        """Test scaling multiplies every value."""
        psi = Field.zeros(grid_1d)
        u = Field.constant(grid_1d, 0.4)
        base = build_functional("mean_value", psi)
        scaled = build_functional("mean_value", psi, scale=2.0)
        assert scaled(u) == 2.0 * base(u)

    def test_rejects_nonpositive_bound(self, grid_1d: Grid):
        """Test the bound must be positive."""
        with pytest.raises(InvariantViolation):
            build_functional("clipped_h_norm", Field.zeros(grid_1d), bound=0.0)


class TestFitting:
    """Tests for the rate fits and error bars."""

    def test_exponential_fit_recovers_rate(self):
        """Test log-linear regression of C exp(-2 t)."""
        t = np.linspace(0.0, 2.0, 11)
        fit = fit_exponential(t, 3.0 * np.exp(-2.0 * t))
        assert fit is not None
        assert fit.slope == pytest.approx(-2.0)
        assert np.exp(fit.intercept) == pytest.approx(3.0)

    def test_exponential_fit_skips_floor(self):
        """Test values at or below the floor are ignored."""
        t = np.arange(5.0)
        values = np.array([1.0, np.exp(-1.0), 0.0, 0.0, 0.0])
        fit = fit_exponential(t, values)
        assert fit is not None
        assert fit.n_points == 2
        assert fit.slope == pytest.approx(-1.0)

    def test_exponential_fit_degenerate(self):
        """Test None when fewer than two points survive."""
        assert fit_exponential(np.arange(3.0), np.array([1.0, 0.0, 0.0])) is None

    def test_loglog_fit(self):
        """Test the slope of y = x^1.5."""
        x = np.array([1e-1, 1e-2, 1e-3])
        fit = fit_loglog(x, x**1.5)
        assert fit is not None
        assert fit.slope == pytest.approx(1.5)

    def test_ensemble_mean(self):
        """Test the standard error is s / sqrt(n)."""
        mean, stderr = ensemble_mean(np.array([1.0, 2.0, 3.0, 4.0]))
        assert mean == 2.5
        assert stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
        assert ensemble_mean(np.array([5.0])) == (5.0, 0.0)

    def test_ensemble_mean_series(self):
        """Test column-wise means."""
        mean, stderr = ensemble_mean_series(np.array([[1.0, 2.0], [3.0, 2.0]]))
        assert np.allclose(mean, [2.0, 2.0])
        assert stderr[1] == 0.0

    def test_batch_means_of_constant(self):
        """Test a constant series has zero batch-means error."""
        assert batch_means_stderr(np.full(100, 0.7)) == 0.0
