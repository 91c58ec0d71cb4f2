"""Tests for noise laws, counter-based streams and the diffusion coefficient."""

import numpy as np
import pytest

from src.core.exceptions import InvalidDt, InvariantViolation
from src.core.grid import Field, Grid, build_grid, field_from_function
from src.core.noise import (
    IncrementSource,
    NoiseIncrement,
    NoiseKind,
    NoiseSpec,
    apply_G,
    empirical_lipschitz,
    hilbert_schmidt_sq,
    increment_stream,
    sample_increment,
    sine_basis,
)


class TestNoiseSpec:
    """Tests for NoiseSpec constants."""

    def test_scalar_has_one_unit_mode(self):
        """Test the scalar law is q_1 = 1 whatever modes says."""
        spec = NoiseSpec(kind=NoiseKind.SCALAR, c=2.0, modes=7)
        assert spec.modes == 1
        assert spec.trace_Q == 1.0
        assert spec.L_G == pytest.approx(4.0)

    def test_multi_mode_eigenvalues(self):
        """Test q_k = k^-(2 + eta)."""
        spec = NoiseSpec(kind="multi_mode", c=1.0, modes=3, q_decay=1.0)
        assert np.allclose(spec.eigenvalues, [1.0, 1.0 / 8.0, 1.0 / 27.0])
        assert spec.L_G == pytest.approx(1.0 + 1.0 / 8.0 + 1.0 / 27.0)

    def test_bounded_needs_clip(self):
        """Test the clipped law requires a clip level."""
        with pytest.raises(InvariantViolation):
            NoiseSpec(kind=NoiseKind.BOUNDED_MULTI_MODE, c=1.0, modes=2)

    def test_kbold_finite_only_when_bounded(self):
        """Test Kbold = c^2 trace_Q clip^2 for clipped noise."""
        bounded = NoiseSpec(kind=NoiseKind.BOUNDED_MULTI_MODE, c=2.0, modes=1, clip=0.5)
        assert bounded.Kbold == pytest.approx(4.0 * 1.0 * 0.25)
        assert NoiseSpec(c=1.0).Kbold == float("inf")


class TestStreams:
    """Tests for counter-based increment streams."""

    def test_same_key_same_draws(self):
        """Test a (seed, id, step) triple always yields the same draws."""
        a = increment_stream(7, 3, 11).standard_normal(4)
        b = increment_stream(7, 3, 11).standard_normal(4)
        assert np.array_equal(a, b)

    def test_different_steps_differ(self):
        """Test consecutive steps use distinct streams."""
        a = increment_stream(7, 3, 11).standard_normal(4)
        b = increment_stream(7, 3, 12).standard_normal(4)
        assert not np.array_equal(a, b)

    def test_different_trajectories_differ(self):
        """Test trajectory ids give independent streams."""
        a = increment_stream(7, 0, 0).standard_normal(4)
        b = increment_stream(7, 1, 0).standard_normal(4)
        assert not np.array_equal(a, b)

    def test_order_independence(self):
        """Test draws do not depend on the order steps are requested in."""
        spec = NoiseSpec(kind="multi_mode", c=1.0, modes=4)
        source = IncrementSource(spec, 5, 2)
        forward = [source.increment(i, 0.01).betas for i in range(5)]
        backward = [source.increment(i, 0.01).betas for i in reversed(range(5))][::-1]
        for x, y in zip(forward, backward):
            assert np.array_equal(x, y)

    def test_increment_variance(self):
        """Test the sample variance of the increments is close to dt."""
        spec = NoiseSpec(c=1.0)
        source = IncrementSource(spec, 1, 0)
        draws = np.array([source.increment(i, 0.04).betas[0] for i in range(4000)])
        assert draws.mean() == pytest.approx(0.0, abs=0.02)
        assert draws.var() == pytest.approx(0.04, rel=0.1)

    def test_increments_uncorrelated_across_steps(self):
        """Test the lag-1 autocorrelation of scalar increments is near zero."""
        source = IncrementSource(NoiseSpec(c=1.0), 9, 0)
        draws = np.array([source.increment(i, 0.01).betas[0] for i in range(100_000)])
        centered = draws - draws.mean()
        lag1 = float(np.dot(centered[:-1], centered[1:]) / np.dot(centered, centered))
        assert abs(lag1) <= 0.02

    def test_rejects_nonpositive_dt(self):
        """Test dt must be positive."""
        with pytest.raises(InvalidDt):
            sample_increment(NoiseSpec(), 0.0, increment_stream(0, 0, 0))


class TestDiffusion:
    """Tests for G and its bookkeeping."""

    def test_sine_basis_is_orthonormal(self, grid_2d: Grid):
        """Test h^d sum e_j e_k = delta_jk for the sampled basis."""
        basis = sine_basis(grid_2d, 5)
        gram = grid_2d.cell_volume * basis @ basis.T
        assert np.allclose(gram, np.eye(5), atol=1e-12)

    def test_vanishes_on_and_below_obstacle(self, grid_1d: Grid):
        """Test G(u) dW = 0 wherever u <= psi."""
        psi = Field.constant(grid_1d, 0.2)
        u = field_from_function(grid_1d, lambda x: x)
        inc = NoiseIncrement(dt=0.01, betas=np.array([0.3]))
        out = apply_G(NoiseSpec(c=1.0), u, psi, inc)
        assert np.all(out.values[u.values <= 0.2] == 0.0)
        above = u.values > 0.2
        assert np.allclose(out.values[above], (u.values[above] - 0.2) * 0.3)

    def test_zero_intensity_is_silent(self, grid_1d: Grid):
        """Test c = 0 gives no noise."""
        u = Field.constant(grid_1d, 3.0)
        inc = NoiseIncrement(dt=0.01, betas=np.array([1.0]))
        assert apply_G(NoiseSpec(c=0.0), u, Field.zeros(grid_1d), inc).sup_norm() == 0.0

    def test_bounded_factor_is_clipped(self, grid_1d: Grid):
        """Test the multiplicative factor saturates at clip."""
        spec = NoiseSpec(kind=NoiseKind.BOUNDED_MULTI_MODE, c=1.0, modes=1, clip=0.5)
        u = Field.constant(grid_1d, 10.0)
        psi = Field.zeros(grid_1d)
        assert hilbert_schmidt_sq(spec, u, psi) == pytest.approx(spec.Kbold * (8.0 / 9.0))
        assert hilbert_schmidt_sq(spec, u, psi) <= spec.Kbold

    def test_empirical_lipschitz_below_constant(self):
        """Test the observed ratio never exceeds L_G."""
        grid = build_grid(1, 16)
        for spec in (
            NoiseSpec(c=1.0),
            NoiseSpec(kind="multi_mode", c=0.5, modes=8),
            NoiseSpec(kind=NoiseKind.BOUNDED_MULTI_MODE, c=1.0, modes=4, clip=1.0),
        ):
            check = empirical_lipschitz(spec, 200, 9, grid=grid)
            assert check.max_ratio <= spec.L_G * (1 + 1e-10)
            if spec.is_bounded:
                assert check.max_hilbert_schmidt_sq <= spec.Kbold * (1 + 1e-10)

    def test_scalar_increment_is_spatially_constant(self, grid_1d: Grid):
        """Test the scalar law multiplies by one Brownian increment everywhere."""
        u = Field.constant(grid_1d, 1.0)
        inc = NoiseIncrement(dt=0.01, betas=np.array([-0.2]))
        out = apply_G(NoiseSpec(c=2.0), u, Field.zeros(grid_1d), inc)
        assert np.allclose(out.values, -0.4)
