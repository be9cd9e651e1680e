"""
Tests for settings loading and the per-run event log
"""

import pytest

from distillkit.config import CONFIG_ENV, DEFAULT_CONFIG_PATH, TOLERANCE_ENV, load_settings
from distillkit.errors import ConfigError
from distillkit.models.settings import Settings
from distillkit.observability import RunLog, read_run_log


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.delenv(TOLERANCE_ENV, raising=False)


class TestLoadSettings:

    def test_repository_config(self):
        settings = load_settings()
        assert settings.source == str(DEFAULT_CONFIG_PATH)
        assert settings.tolerance.rank_rtol == 1e-8
        assert settings.search.restarts == 64
        assert settings.negdet.k_max == 4

    def test_custom_file(self, tmp_path):
        path = tmp_path / "custom.yaml"
        path.write_text("search:\n  restarts: 5\n  seed: 11\nnegdet:\n  k_max: 3\n")
        settings = load_settings(path)
        assert settings.search.restarts == 5
        assert settings.search.seed == 11
        assert settings.search.max_iters == 500
        assert settings.negdet.k_max == 3

    def test_missing_file_uses_defaults(self, tmp_path):
        settings = load_settings(tmp_path / "absent.yaml")
        assert settings.source is None
        assert settings.model_dump() == Settings().model_dump()

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_settings(path).search.restarts == 64

    def test_env_selects_file(self, tmp_path, monkeypatch):
        path = tmp_path / "env.yaml"
        path.write_text("decide:\n  spot_checks: 2\n")
        monkeypatch.setenv(CONFIG_ENV, str(path))
        assert load_settings().decide.spot_checks == 2

    @pytest.mark.parametrize("text", [
        "tolerance: [unclosed",
        "- just\n- a list\n",
        "tolerance:\n  rank_rtol: 2.0\n",
        "search:\n  restarts: many\n",
    ])
    def test_invalid(self, tmp_path, text):
        path = tmp_path / "bad.yaml"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_settings(path)


class TestToleranceOverride:

    def test_override(self, monkeypatch):
        monkeypatch.setenv(TOLERANCE_ENV, "1e-6")
        settings = load_settings()
        assert settings.tolerance.rank_rtol == 1e-6
        assert settings.tolerance.zero_atol == 1e-10

    @pytest.mark.parametrize("raw", ["tight", "0", "-1e-3"])
    def test_invalid_override(self, monkeypatch, raw):
        monkeypatch.setenv(TOLERANCE_ENV, raw)
        with pytest.raises(ConfigError):
            load_settings()


class TestRunLog:

    def test_entries(self, tmp_path):
        run_log = RunLog(tmp_path / "logs", "analyze", "bell.qsf.json", run_id="abc123")
        run_log.log_stage("ppt-check", "miss", {"min_gamma_eig": -0.5})
        run_log.log_verdict("OneDistillable", "two-by-n-npt", 0.01)
        entries = run_log.get_log_contents()
        assert [e["event"] for e in entries] == ["analysis.started", "stage.evaluated", "verdict.reached"]
        assert entries[1]["details"] == {"min_gamma_eig": -0.5}
        assert run_log.log_file.name.endswith("_abc123.jsonl")

    def test_failure(self, tmp_path):
        run_log = RunLog(tmp_path, "analyze", "x")
        run_log.log_failure(ConfigError("broken"))
        last = run_log.get_log_contents()[-1]
        assert last["event"] == "analysis.failed"
        assert last["error_type"] == "ConfigError"

    def test_malformed_lines_are_skipped(self, tmp_path):
        run_log = RunLog(tmp_path, "analyze", "x")
        with open(run_log.log_file, "a") as f:
            f.write("{truncated\n\n")
        run_log.log_stage("negdet", "fired")
        entries = read_run_log(run_log.log_file)
        assert [e["event"] for e in entries] == ["analysis.started", "stage.evaluated"]
