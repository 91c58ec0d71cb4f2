"""Tests for result storage and the helpers it relies on."""

import json
import math
from pathlib import Path

import numpy as np

from src import __version__
from src.infrastructure.storage import ResultStorage, render_csv
from src.utils.helpers import calculate_hash, format_float, to_jsonable


class TestRenderCsv:
    """Tests for render_csv."""

    def test_header_and_rows(self):
        """Test one header line and one line per row."""
        text = render_csv([{"t": 0.0, "value": 1.5}, {"t": 0.1, "value": -2.0}])
        assert text == "t,value\n0.0,1.5\n0.1,-2.0\n"

    def test_floats_round_trip(self):
        """Test written floats parse back to the same value."""
        value = 1.0 / 3.0
        text = render_csv([{"x": value}])
        assert float(text.splitlines()[1]) == value

    def test_empty(self):
        """Test no rows gives empty text."""
        assert render_csv([]) == ""


class TestHelpers:
    """Tests for JSON helpers."""

    def test_to_jsonable(self):
        """Test numpy values and non-finite floats become JSON-safe."""
        out = to_jsonable({"a": np.array([1.0, 2.0]), "b": np.float64(3.0), "c": math.inf})
        assert out == {"a": [1.0, 2.0], "b": 3.0, "c": None}

    def test_format_float_non_finite(self):
        """Test NaN and infinities are spelled out."""
        assert format_float(math.nan) == "nan"
        assert format_float(-math.inf) == "-inf"

    def test_hash_ignores_key_order(self):
        """Test the config hash depends on content only."""
        assert calculate_hash({"a": 1, "b": 2}) == calculate_hash({"b": 2, "a": 1})


class TestResultStorage:
    """Tests for ResultStorage."""

    def test_save_writes_both_artifacts(self, tmp_path: Path):
        """Test CSV and JSON are written with the command stem."""
        storage = ResultStorage(tmp_path / "out")
        csv_path, json_path = storage.save(
            "classify",
            [{"K": 1.0}],
            {"config": {"master_seed": 1}, "values": np.arange(3.0)},
            timestamp="20240101T000000000000Z",
        )
        assert csv_path.name == "classify_20240101T000000000000Z.csv"
        assert csv_path.read_text() == "K\n1.0\n"
        payload = json.loads(json_path.read_text())
        assert payload["command"] == "classify"
        assert payload["version"] == __version__
        assert payload["values"] == [0.0, 1.0, 2.0]
        assert payload["config_hash"] == calculate_hash({"master_seed": 1})

    def test_config_toml_written_alongside(self, tmp_path: Path):
        """Test the resolved config lands next to the table under the same stem."""
        storage = ResultStorage(tmp_path)
        storage.save("coupling", [{"t": 0.0}], {"n_paths": 2}, timestamp="b", config_toml="master_seed = 3\n")
        assert (tmp_path / "coupling_b.toml").read_text() == "master_seed = 3\n"
        assert "config_hash" not in json.loads((tmp_path / "coupling_b.json").read_text())

    def test_no_toml_without_config(self, tmp_path: Path):
        """Test only CSV and JSON are written when no config text is given."""
        ResultStorage(tmp_path).save("simulate", [{"t": 0.0}], {"records": 1}, timestamp="a")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["simulate_a.csv", "simulate_a.json"]
