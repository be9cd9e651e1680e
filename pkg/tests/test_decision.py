"""
Tests for the decision pipeline and verdict verification
"""

import numpy as np
import pytest

from distillkit.analysis.decision import (
    PROVENANCE,
    Verdict,
    VerdictKind,
    decide,
    state_facts,
    verify_verdict,
)
from distillkit.core import BipartiteState, pure_state
from distillkit.generators import (
    gen_b_irreducible_template,
    gen_b_reducible,
    gen_ppt_rank_n,
    gen_schmidt_rank,
)
from distillkit.observability import RunLog, read_run_log


def _stages(verdict):
    return [s["stage"] for s in verdict.stages]


def _isotropic(p):
    psi = np.zeros(9)
    psi[[0, 4, 8]] = 1 / np.sqrt(3)
    mat = p * np.outer(psi, psi) + (1 - p) * np.eye(9) / 9
    return BipartiteState(mat, 3, 3)


def test_facts(bell):
    facts = state_facts(bell)
    assert facts["dims"] == [2, 2]
    assert facts["rank"] == 1
    assert facts["local_ranks"] == [2, 2]
    assert facts["schmidt_rank"] == 4
    assert facts["npt"] is True
    assert facts["min_gamma_eig"] == pytest.approx(-0.5)


class TestSeparable:

    def test_product(self, mixed):
        verdict = decide(mixed)
        assert verdict.kind is VerdictKind.SEPARABLE
        assert verdict.provenance == "product"
        assert verify_verdict(mixed, verdict)["ok"]

    def test_schmidt_rank_two(self, settings):
        rho = gen_schmidt_rank(3, 3, 2, seed=4)
        verdict = decide(rho, settings)
        assert verdict.kind is VerdictKind.SEPARABLE
        assert verdict.provenance == "sr2-classical-classical"
        assert verdict.certificate["cc_normal_form"].off_diag_residual < 1e-8
        assert verify_verdict(rho, verdict)["ok"]

    def test_ppt_rank_n(self, settings):
        rho = gen_ppt_rank_n(3, 3, seed=9)
        verdict = decide(rho, settings)
        assert verdict.kind is VerdictKind.SEPARABLE
        assert verdict.provenance == "ppt-rank-n-product-form"
        assert len(verdict.certificate["ppt_canonical_form"].product_terms) == 3

    def test_generic_ppt(self, settings):
        rho = _isotropic(0.2)
        verdict = decide(rho, settings)
        assert verdict.kind is VerdictKind.PPT_UNDISTILLABLE
        assert verdict.provenance == "ppt"
        assert verdict.witness is None


class TestDistillable:

    def test_bell(self, bell):
        verdict = decide(bell)
        assert verdict.kind is VerdictKind.ONE_DISTILLABLE
        assert verdict.provenance == "two-by-n-npt"
        assert verdict.witness.value == pytest.approx(-0.5)
        assert _stages(verdict) == ["ppt-check", "schmidt-rank-three", "two-by-n"]
        assert verify_verdict(bell, verdict)["ok"]

    def test_low_rank(self, settings):
        psi = np.zeros(9)
        psi[[0, 4, 8]] = 1.0
        rho = pure_state(psi, 3, 3)
        verdict = decide(rho, settings)
        assert verdict.kind is VerdictKind.ONE_DISTILLABLE
        assert verdict.provenance == "rank-at-most-max-local-rank"
        assert verify_verdict(rho, verdict)["ok"]

    def test_general_search(self, settings):
        rho = _isotropic(0.5)
        verdict = decide(rho, settings)
        assert verdict.kind is VerdictKind.ONE_DISTILLABLE
        assert verdict.provenance == "search"
        assert verdict.witness.value < -0.1
        assert verify_verdict(rho, verdict)["ok"]

    def test_direct_sum(self, settings):
        rho = gen_b_reducible(_isotropic(0.5), gen_ppt_rank_n(3, 3, seed=1), weight=0.5)
        verdict = decide(rho, settings)
        assert verdict.kind is VerdictKind.ONE_DISTILLABLE
        assert verdict.provenance == "b-direct-sum"
        assert verdict.witness.origin == "direct-sum"
        assert verdict.certificate["summand_verdict"]["kind"] == "OneDistillable"
        assert verify_verdict(rho, verdict)["ok"]

    def test_rank_n_plus_one_template(self, settings):
        rho = gen_b_irreducible_template(None, 4, 4, seed=1)
        verdict = decide(rho, settings)
        assert verdict.kind is VerdictKind.ONE_DISTILLABLE
        assert verdict.provenance in {"negative-determinant-submatrix", "kernel-line",
                                      "rank-n-plus-one-irreducible"}
        assert "negdet" in _stages(verdict)
        assert not verdict.alarms
        assert verify_verdict(rho, verdict)["ok"]


def test_every_provenance_has_a_statement():
    for key, statement in PROVENANCE.items():
        assert statement
        assert Verdict(VerdictKind.UNKNOWN, key).statement == statement


def test_to_dict(bell):
    doc = decide(bell).to_dict()
    assert doc["kind"] == "OneDistillable"
    assert doc["statement"] == PROVENANCE["two-by-n-npt"]
    assert doc["witness"]["type"] == "witness"


def test_verify_rejects_forged_verdicts(bell, mixed):
    forged = Verdict(VerdictKind.SEPARABLE, "product")
    check = verify_verdict(bell, forged)
    assert not check["ok"]
    assert not verify_verdict(mixed, Verdict(VerdictKind.ONE_DISTILLABLE, "search"))["ok"]
    assert not verify_verdict(mixed, Verdict(VerdictKind.ONE_UNDISTILLABLE_NPT, "sr3-npt-undistillable"))["ok"]


def test_decision_is_deterministic(settings):
    rho = _isotropic(0.5)
    first = decide(rho, settings)
    second = decide(rho, settings)
    assert np.array_equal(first.witness.psi, second.witness.psi)
    assert first.stages == second.stages


def test_run_log_records_stages(bell, tmp_path):
    run_log = RunLog(tmp_path, "analyze", "bell")
    verdict = decide(bell, run_log=run_log)
    entries = read_run_log(run_log.log_file)
    assert entries[0]["event"] == "analysis.started"
    stages = [e["stage"] for e in entries if e["event"] == "stage.evaluated"]
    assert stages == _stages(verdict)
    assert all(e["run_id"] == run_log.run_id for e in entries)
