"""
Tests for the distillkit command line
"""

import json

import pytest

from distillkit.cli.main import main
from distillkit.core import bell_state, write_state_file
from distillkit.errors import EXIT_CONTRACT, EXIT_INPUT, EXIT_OK, EXIT_SUITE
from distillkit.generators import gen_schmidt_rank
from distillkit.suites import SUITES
from distillkit.suites.registry import register


@pytest.fixture
def bell_file(tmp_path):
    path = tmp_path / "bell.qsf.json"
    write_state_file(bell_state(), path)
    return path


@pytest.fixture
def sr2_file(tmp_path):
    path = tmp_path / "sr2.qsf.json"
    write_state_file(gen_schmidt_rank(3, 3, 2, seed=4), path)
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_analyze(capsys, bell_file):
    code, doc = run_json(capsys, "analyze", str(bell_file))
    assert code == EXIT_OK
    assert doc["schema"] == "report-1"
    assert doc["command"] == "analyze"
    assert doc["input"]["dimA"] == 2
    assert doc["verdict"]["kind"] == "OneDistillable"
    assert doc["certificates"]["verification"]["ok"]
    assert "timings" not in doc


def test_witness(capsys, bell_file):
    code, doc = run_json(capsys, "witness", str(bell_file), "--copies", "1", "--restarts", "8")
    assert code == EXIT_OK
    assert doc["result"]["found"]
    assert doc["result"]["value"] == pytest.approx(-0.5)
    assert doc["budget"]["search"]["restarts"] == 8


def test_schmidt(capsys, sr2_file):
    code, doc = run_json(capsys, "schmidt", str(sr2_file))
    assert code == EXIT_OK
    assert doc["result"]["schmidt_rank"] == 2


def test_decompose(capsys, sr2_file):
    code, doc = run_json(capsys, "decompose", str(sr2_file), "--side", "B")
    assert code == EXIT_OK
    assert doc["result"]["side"] == "B"
    assert doc["result"]["parts"] >= 1


def test_normal_form(capsys, sr2_file):
    code, doc = run_json(capsys, "normal-form", str(sr2_file), "--form", "cc")
    assert code == EXIT_OK
    assert doc["certificates"]["normal_form"]["form"] == "cc"


def test_generate_prints_state(capsys):
    code, doc = run_json(capsys, "generate", "random", "--M", "2", "--N", "2", "--rank", "1", "--seed", "1")
    assert code == EXIT_OK
    assert doc["result"]["state"]["format"] == "qsf-1"
    assert doc["result"]["labels"]["rank"] == 1


def test_generate_writes_fixture(capsys, tmp_path):
    code, doc = run_json(capsys, "generate", "random", "--M", "2", "--N", "2", "--rank", "1",
                         "--seed", "1", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert (tmp_path / "random" / "labels.json").exists()
    assert doc["result"]["path"].endswith(".qsf.json")


def test_verify(capsys):
    code, doc = run_json(capsys, "verify", "--suite", "two-by-n", "--trials", "2")
    assert code == EXIT_OK
    assert doc["result"]["ok"]
    assert doc["result"]["trials"] == 2


class TestErrors:

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "broken.qsf.json"
        path.write_text("{not json")
        code, doc = run_json(capsys, "analyze", str(path))
        assert code == EXIT_INPUT
        assert doc["error"]["type"] == "FormatError"

    def test_factor_block_shape(self, capsys, tmp_path, bell_file):
        doc = json.loads(bell_file.read_text())
        doc["factor"] = {"R": 2, "blocks": [[[[1, 0]]]] * 2}
        path = tmp_path / "bad-factor.qsf.json"
        path.write_text(json.dumps(doc))
        code, out = run_json(capsys, "analyze", str(path))
        assert code == EXIT_INPUT
        assert out["error"]["type"] == "FormatError"

    @pytest.mark.parametrize("flags, name", [
        (["--restarts", "0"], "--restarts"),
        (["--seed", "-1"], "--seed"),
        (["--threads", "0"], "--threads"),
    ])
    def test_invalid_budget_flags(self, capsys, bell_file, flags, name):
        code, doc = run_json(capsys, "witness", str(bell_file), *flags)
        assert code == EXIT_INPUT
        assert doc["error"]["type"] == "ConfigError"
        assert name in doc["error"]["message"]

    def test_negative_generator_seed(self, capsys):
        code, doc = run_json(capsys, "generate", "random", "--M", "2", "--N", "2", "--rank", "1", "--seed", "-3")
        assert code == EXIT_INPUT
        assert doc["error"]["type"] == "ConfigError"

    def test_missing_file(self, capsys, tmp_path):
        code, doc = run_json(capsys, "analyze", str(tmp_path / "absent.qsf.json"))
        assert code == EXIT_INPUT
        assert doc["error"]["type"] == "FormatError"

    def test_contract_violation(self, capsys, bell_file):
        code, doc = run_json(capsys, "normal-form", str(bell_file), "--form", "cc")
        assert code == EXIT_CONTRACT
        assert doc["error"]["type"] == "SchmidtRankMismatch"
        assert doc["error"]["module"].startswith("distillkit.")

    def test_bad_config(self, capsys, tmp_path, bell_file):
        config = tmp_path / "config.yaml"
        config.write_text("tolerance: [unclosed")
        code, doc = run_json(capsys, "analyze", str(bell_file), "--config", str(config))
        assert code == EXIT_INPUT
        assert doc["error"]["type"] == "ConfigError"

    def test_suite_failure(self, capsys):
        @register("cli-fails", "always fails", default_trials=1)
        def cli_fails(result, settings):
            result.check(False, "never")

        try:
            code, doc = run_json(capsys, "verify", "--suite", "cli-fails")
        finally:
            SUITES.pop("cli-fails")
        assert code == EXIT_SUITE
        assert doc["result"]["ok"] is False
        assert doc["result"]["failures"] == [{"check": "never"}]


class TestOutputOptions:

    def test_human(self, capsys, bell_file):
        code, out = run(capsys, "analyze", str(bell_file), "--human")
        assert code == EXIT_OK
        assert out.startswith("analyze:")
        assert "verdict: OneDistillable (two-by-n-npt)" in out

    def test_human_error(self, capsys, bell_file):
        code, out = run(capsys, "normal-form", str(bell_file), "--form", "cc", "--human")
        assert code == EXIT_CONTRACT
        assert out.startswith("error: SchmidtRankMismatch")

    def test_timings(self, capsys, bell_file):
        _, doc = run_json(capsys, "analyze", str(bell_file), "--timings")
        assert doc["timings"]["total"] >= 0

    def test_run_log(self, capsys, tmp_path, bell_file):
        log_dir = tmp_path / "logs"
        code, _ = run(capsys, "analyze", str(bell_file), "--log-dir", str(log_dir))
        assert code == EXIT_OK
        files = list(log_dir.glob("*.jsonl"))
        assert len(files) == 1
        events = [json.loads(line)["event"] for line in files[0].read_text().splitlines()]
        assert events[0] == "analysis.started"
        assert events[-1] == "verdict.reached"

    def test_reports_are_deterministic(self, capsys, sr2_file):
        _, first = run_json(capsys, "analyze", str(sr2_file), "--seed", "3")
        _, second = run_json(capsys, "analyze", str(sr2_file), "--seed", "3")
        assert first == second
