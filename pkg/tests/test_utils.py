"""Tests for utility functions."""

import json
import math
from datetime import datetime

import numpy as np
import pytest

from src.bath import BathKind
from src.utils import (
    format_float,
    get_default_jobs,
    get_log_level,
    sanitize_filename,
    save_results,
    to_jsonable,
    utc_timestamp,
)


class TestEnvironment:
    """Tests for the environment-driven defaults."""

    def test_log_level_default(self, monkeypatch):
        """Test the fallback when ZENO_LOG_LEVEL is unset."""
        monkeypatch.delenv("ZENO_LOG_LEVEL", raising=False)
        assert get_log_level() == "WARNING"

    def test_log_level_is_normalized(self, monkeypatch):
        """Test that the level name is case-insensitive."""
        monkeypatch.setenv("ZENO_LOG_LEVEL", " debug ")
        assert get_log_level() == "DEBUG"

    def test_unknown_log_level(self, monkeypatch):
        """Test that an unknown level falls back to the default."""
        monkeypatch.setenv("ZENO_LOG_LEVEL", "chatty")
        assert get_log_level("INFO") == "INFO"

    @pytest.mark.parametrize("raw, expected", [("4", 4), ("0", 1), ("-3", 1), ("many", 1)])
    def test_jobs(self, monkeypatch, raw, expected):
        """Test that ZENO_JOBS is read as a positive integer."""
        monkeypatch.setenv("ZENO_JOBS", raw)
        assert get_default_jobs() == expected

    def test_jobs_default(self, monkeypatch):
        """Test one worker when ZENO_JOBS is unset."""
        monkeypatch.delenv("ZENO_JOBS", raising=False)
        assert get_default_jobs() == 1


class TestSanitizeFilename:
    """Tests for sanitize_filename function."""

    def test_sanitize_filename_removes_invalid_chars(self):
        """Test that invalid characters are removed."""
        result = sanitize_filename("zeno/alpha*0.01?")
        assert "/" not in result
        assert "*" not in result
        assert "?" not in result

    def test_sanitize_filename_replaces_spaces(self):
        """Test that spaces are replaced with underscores."""
        assert sanitize_filename("fig3 zeno run") == "fig3_zeno_run"

    def test_sanitize_filename_keeps_labels(self):
        """Test that bath labels pass through unchanged."""
        label = "fig3_zeno_lorentzian_alpha0.01_lambda0.09"
        assert sanitize_filename(label) == label


class TestJsonHelpers:
    """Tests for format_float and to_jsonable."""

    @pytest.mark.parametrize("value", [0.1, 1e-12, 0.98336, 1.0 / 3.0])
    def test_format_float_round_trips(self, value):
        """Test that the text form parses back exactly."""
        assert float(format_float(value)) == value

    def test_to_jsonable_converts_numpy_and_enums(self):
        """Test conversion of numpy scalars, arrays and enums."""
        value = to_jsonable({"a": np.float64(0.5), "b": np.arange(3), "c": BathKind.OHMIC, "d": np.bool_(True)})
        assert value == {"a": 0.5, "b": [0, 1, 2], "c": "ohmic", "d": True}
        assert isinstance(value["d"], bool)

    def test_to_jsonable_nonfinite(self):
        """Test that NaN and infinities become None."""
        assert to_jsonable([math.nan, math.inf, -np.inf, 1.0]) == [None, None, None, 1.0]


class TestSaveResults:
    """Tests for save_results function."""

    def test_save_results_writes_json(self, tmp_path):
        """Test that an envelope is saved to a JSON file."""
        path = save_results("eta run", {"eta": np.float64(0.98), "gamma": math.nan}, tmp_path / "runs")
        assert path == tmp_path / "runs" / "eta_run.json"
        assert json.loads(path.read_text(encoding="utf-8")) == {"eta": 0.98, "gamma": None}

    def test_save_results_writes_table_text(self, tmp_path):
        """Test that CSV text replaces the JSON envelope."""
        path = save_results("zeno", {}, tmp_path, table_text="tau,gamma\n1,0.02\n", suffix=".csv")
        assert path.name == "zeno.csv"
        assert path.read_text(encoding="utf-8") == "tau,gamma\n1,0.02\n"


class TestUtcTimestamp:
    """Tests for utc_timestamp."""

    def test_timezone_aware(self):
        """Test that the timestamp carries the UTC offset."""
        stamp = datetime.fromisoformat(utc_timestamp())
        assert stamp.utcoffset().total_seconds() == 0
