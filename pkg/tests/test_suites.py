"""
Tests for the property suite registry and small runs of every suite
"""

import pytest

from distillkit.errors import InputError, SuiteFailure
from distillkit.models.settings import SearchBudget, Settings
from distillkit.suites import ALL_SUITES, SUITES, SuiteResult, run_suite
from distillkit.suites.registry import register, trial_seed

EXPECTED_SUITES = {
    "sr2-cc",
    "sr3-undistillable",
    "ppt-rank-n",
    "two-by-n",
    "rank-le-max",
    "negdet",
    "rank-n-plus-one",
    "direct-sum",
    "product-vectors",
    "local-invariance",
}


@pytest.fixture
def fast_settings():
    return Settings(search=SearchBudget(restarts=24, max_iters=300))


@pytest.fixture
def failing_suite():
    @register("always-fails", "fixture suite with one failing check", default_trials=1)
    def always_fails(result, settings):
        result.check(True, "passes")
        result.check(False, "fails", trial=0)

    yield "always-fails"
    SUITES.pop("always-fails")


def test_registry_contents():
    assert set(SUITES) == EXPECTED_SUITES
    for info in SUITES.values():
        assert info.default_trials > 0
        assert info.description


@pytest.mark.parametrize("name", sorted(EXPECTED_SUITES - {"sr3-undistillable", "rank-n-plus-one"}))
def test_small_run(name, fast_settings):
    summary = run_suite(name, trials=3, seed=7, settings=fast_settings)
    assert summary["ok"]
    assert summary["suite"] == name
    assert summary["trials"] == 3
    assert summary["failed"] == 0
    assert summary["checks"] == summary["passed"]


@pytest.mark.slow
@pytest.mark.parametrize("name", ["sr3-undistillable", "rank-n-plus-one"])
def test_expensive_suites(name, fast_settings):
    summary = run_suite(name, trials=2, seed=1, settings=fast_settings)
    assert summary["ok"]


def test_summary_is_deterministic(fast_settings):
    first = run_suite("two-by-n", trials=4, seed=3, settings=fast_settings)
    second = run_suite("two-by-n", trials=4, seed=3, settings=fast_settings)
    assert first == second


def test_unknown_suite():
    with pytest.raises(InputError):
        run_suite("no-such-suite")


def test_failure_carries_summary(failing_suite):
    with pytest.raises(SuiteFailure) as excinfo:
        run_suite(failing_suite)
    summary = excinfo.value.summary
    assert summary["ok"] is False
    assert summary["checks"] == 2
    assert summary["passed"] == 1
    assert summary["failures"] == [{"check": "fails", "trial": 0}]


def test_all_reports_every_suite(failing_suite, monkeypatch):
    kept = {failing_suite: SUITES[failing_suite]}
    monkeypatch.setattr("distillkit.suites.registry.SUITES", kept)
    with pytest.raises(SuiteFailure) as excinfo:
        run_suite(ALL_SUITES)
    summary = excinfo.value.summary
    assert summary["suite"] == ALL_SUITES
    assert [r["suite"] for r in summary["results"]] == [failing_suite]


class TestSuiteResult:

    def test_counters(self):
        result = SuiteResult("demo", trials=2, seed=0)
        result.check(True, "ok")
        result.skip("degenerate")
        result.skip("degenerate")
        result.worst("residual", 1e-12)
        result.worst("residual", 1e-9)
        result.worst("residual", None)
        result.worst("margin", 0.5, largest=False)
        result.worst("margin", 0.7, largest=False)
        result.count("accepted")
        doc = result.to_dict()
        assert doc["ok"]
        assert doc["skipped"] == {"degenerate": 2}
        assert doc["stats"] == {"accepted": 1, "margin": 0.5, "residual": 1e-9}

    def test_trial_seed(self):
        assert trial_seed(3, 1) == trial_seed(3, 1)
        assert trial_seed(3, 1) != trial_seed(3, 2)
        assert 0 <= trial_seed(0, 0) < 2 ** 31
