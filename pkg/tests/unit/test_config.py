"""Tests for settings, experiment schemas and named presets."""

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from src.cli.presets import (
    PRESETS,
    build_field,
    build_problem,
    build_step_config,
    preset,
    preset_names,
    resolve_scenario,
)
from src.config import get_settings
from src.core.exceptions import ConfigError, UnknownPreset
from src.core.grid import build_grid
from src.core.noise import NoiseKind
from src.core.operators import apply_A
from src.schemas.experiment import (
    ExperimentConfig,
    FieldKind,
    FieldSpecConfig,
    ScenarioConfig,
    StepSettings,
    dump_config,
    load_config,
)


class TestSettings:
    """Tests for environment-driven settings."""

    def test_defaults(self):
        """Test the built-in defaults."""
        settings = get_settings()
        assert settings.default_delta_reg == 1e-8
        assert settings.worker_count >= 1

    def test_environment_override(self, monkeypatch: pytest.MonkeyPatch):
        """Test OBSTACLE_-prefixed variables override defaults."""
        monkeypatch.setenv("OBSTACLE_MASTER_SEED", "123")
        monkeypatch.setenv("OBSTACLE_THREADS", "3")
        settings = get_settings()
        assert settings.master_seed == 123
        assert settings.worker_count == 3

    def test_seed_default_flows_into_config(self, monkeypatch: pytest.MonkeyPatch):
        """Test the experiment seed defaults to the settings seed."""
        monkeypatch.setenv("OBSTACLE_MASTER_SEED", "9")
        assert ExperimentConfig().master_seed == 9


class TestLoadConfig:
    """Tests for TOML loading and validation."""

    def test_none_gives_defaults(self):
        """Test a missing path yields the default experiment."""
        config = load_config(None)
        assert config.scenario.preset is None
        assert config.tightness.max_spread == 1.5

    def test_parses_blocks(self, tmp_path: Path):
        """Test a TOML file populates the scenario and command blocks."""
        path = tmp_path / "run.toml"
        path.write_text(
            'master_seed = 5\n[scenario]\npreset = "example-p3"\nn = 8\n'
            "[step]\ndt = 0.02\n[coupling]\nn_paths = 3\n"
        )
        config = load_config(path)
        assert config.master_seed == 5
        assert config.scenario.n == 8
        assert config.step.dt == 0.02
        assert config.coupling.n_paths == 3

    def test_missing_file(self, tmp_path: Path):
        """Test a nonexistent file is a configuration error."""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.toml")

    def test_invalid_toml(self, tmp_path: Path):
        """Test broken TOML is a configuration error."""
        path = tmp_path / "bad.toml"
        path.write_text("[scenario\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path: Path):
        """Test misspelled keys are not silently ignored."""
        path = tmp_path / "typo.toml"
        path.write_text("[scenario]\nkapa = 1.0\n")
        with pytest.raises(ValidationError):
            load_config(path)

    def test_burn_in_before_horizon(self):
        """Test the ergodic window must be nonempty."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"ergodic": {"horizon": 5.0, "burn_in": 5.0}})

    def test_bounded_noise_needs_clip(self):
        """Test bounded noise without clip is refused."""
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"noise": {"kind": "bounded_multi_mode", "c": 1.0}})

    def test_field_roles(self):
        """Test psi cannot be defined relative to itself."""
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"psi": {"kind": "obstacle"}})

    def test_dump_validates_back(self):
        """Test a dumped config validates to an equal model."""
        config = ExperimentConfig.model_validate({"scenario": {"preset": "stationary", "n": 8}})
        assert ExperimentConfig.model_validate(config.model_dump(mode="json")) == config


class TestDumpConfig:
    """Tests for writing configs back to TOML."""

    def test_default_round_trip(self, tmp_path: Path):
        """Test the default config reads back unchanged."""
        config = ExperimentConfig(master_seed=2**64 - 1)
        path = tmp_path / "default.toml"
        path.write_text(dump_config(config), encoding="utf-8")
        assert load_config(path).model_dump() == config.model_dump()

    def test_nested_blocks_round_trip(self, tmp_path: Path):
        """Test scenario sub-tables, enums, lists and paths survive the trip."""
        config = ExperimentConfig.model_validate(
            {
                "output_dir": str(tmp_path / "out dir"),
                "threads": 2,
                "scenario": {
                    "preset": "example-p3",
                    "name": 'quoted "name"',
                    "kappa": -0.5,
                    "noise": {"kind": "bounded_multi_mode", "c": 0.25, "modes": 3, "clip": 1.5},
                    "u0": {"kind": "obstacle", "value": 1e-7},
                },
                "step": {"dt": 0.02, "epsilon": 1e-5},
                "rate_study": {"epsilons": [1e-2, 3e-3]},
                "ergodic": {"functional": "mean_value", "bound": 2.0, "horizon": 4.0, "burn_in": 1.0},
            }
        )
        path = tmp_path / "nested.toml"
        path.write_text(dump_config(config), encoding="utf-8")
        loaded = load_config(path)
        assert loaded.model_dump() == config.model_dump()
        assert loaded.scenario.u0 is not None
        assert loaded.scenario.u0.kind == FieldKind.OBSTACLE
        assert loaded.output_dir == tmp_path / "out dir"

    def test_unset_fields_omitted(self):
        """Test None-valued fields are left out so presets still fill them."""
        text = dump_config(ExperimentConfig(scenario=ScenarioConfig(preset="stationary")))
        assert "[scenario]\npreset = \"stationary\"\n" in text
        assert "\nkappa =" not in text
        assert "output_dir" not in text


class TestPresets:
    """Tests for named scenarios and the problem builders."""

    def test_names(self):
        """Test the registry lists every example."""
        assert set(preset_names()) == {
            "stationary",
            "example-p3",
            "example-p3-unique",
            "example-p2-unique",
            "example-p15-unique",
            "ls-regular",
        }
        assert preset_names() == sorted(PRESETS)

    def test_unknown_preset(self):
        """Test an unregistered name raises UnknownPreset."""
        with pytest.raises(UnknownPreset):
            preset("no-such-problem")

    def test_stationary_is_balanced(self):
        """Test u0 = psi and f = A(psi) for the stationary preset."""
        problem, cfg = preset("stationary")
        assert problem.grid.n == 64
        assert problem.u0.allclose(problem.psi)
        assert problem.f.allclose(apply_A(problem.operator, problem.psi))
        assert cfg.dt == 0.01
        assert cfg.epsilon == 1e-5

    def test_ls_regular_compatibility(self):
        """Test h^- = 1 everywhere for psi = 0 and f = -1."""
        problem, _ = preset("ls-regular")
        assert problem.compatibility.h_minus_sup == pytest.approx(1.0)
        assert problem.compatibility.h_plus.sup_norm() == 0.0

    def test_example_data(self):
        """Test the example has psi = 0, f = sin(x) and u0 = 1."""
        problem, cfg = preset("example-p3")
        x = problem.grid.node_coordinates()[0]
        assert problem.psi.sup_norm() == 0.0
        assert np.allclose(problem.f.values, np.sin(x))
        assert np.allclose(problem.u0.values, 1.0)
        assert problem.noise.kind == NoiseKind.SCALAR
        assert cfg.q_tilde == 2.0

    def test_singular_example_uses_regularizer(self):
        """Test the p = 1.5 example gets the default regularizer and q = 1.5."""
        problem, cfg = preset("example-p15-unique")
        assert problem.operator.reg == get_settings().default_delta_reg
        assert cfg.q_tilde == 1.5

    def test_overrides_win_over_preset(self):
        """Test explicit scenario fields replace the preset's."""
        resolved = resolve_scenario(ScenarioConfig(preset="example-p3", n=8, kappa=2.0))
        assert resolved.n == 8
        assert resolved.kappa == 2.0
        assert resolved.p == 3.0
        assert resolved.name == "example-p3"

    def test_custom_bounded_scenario(self):
        """Test a scenario without preset builds clipped multi-mode noise in 2D."""
        scenario = ScenarioConfig.model_validate(
            {
                "dim": 2,
                "n": 6,
                "p": 2.5,
                "noise": {"kind": "bounded_multi_mode", "c": 0.5, "modes": 4, "clip": 2.0},
            }
        )
        problem = build_problem(scenario)
        assert problem.grid.dof == 36
        assert problem.noise.Kbold == pytest.approx(0.25 * problem.noise.trace_Q * 4.0)
        assert problem.name == "custom"

    def test_obstacle_field_needs_psi(self):
        """Test relative recipes fail without the obstacle."""
        with pytest.raises(ConfigError):
            build_field(FieldSpecConfig(kind=FieldKind.OBSTACLE), build_grid(1, 4))

    def test_step_settings_override(self):
        """Test explicit step settings are used as given."""
        problem, _ = preset("example-p3")
        cfg = build_step_config(problem.operator, StepSettings(dt=0.02, epsilon=1e-3, newton_max_iters=7))
        assert (cfg.dt, cfg.epsilon, cfg.newton_max_iters) == (0.02, 1e-3, 7)
