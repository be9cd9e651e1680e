"""
Verdict Decision Tree

Runs the ordered distillability pipeline on a state and returns a Verdict
carrying the certificate that justifies it. Every OneDistillable verdict
holds a witness that re-verifies against the input from scratch.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
import structlog

from ..core import numkernel as nk
from ..core.state import BipartiteState, restrict_to_support, swap_sides
from ..errors import ContractViolation
from ..models.settings import Settings
from ..observability.run_log import RunLog
from .normal_forms import cc_normal_form, ppt_rank_n_canonical, sr3_compression_spot_check
from .schmidt import schmidt_rank_report
from .structure import b_decompose, range_product_vector
from .witness import (
    SubmatrixCertificate,
    Witness,
    distill_2xn,
    is_npt,
    kernel_line_criterion,
    kernel_line_starts,
    negdet_search,
    pull_back_witness,
    run_witness_search,
    verify_witness,
)

logger = structlog.get_logger(__name__)


class VerdictKind(str, Enum):
    SEPARABLE = "Separable"
    PPT_UNDISTILLABLE = "PPTUndistillable"
    ONE_UNDISTILLABLE_NPT = "OneUndistillableNPT"
    ONE_DISTILLABLE = "OneDistillable"
    UNKNOWN = "Unknown"


# provenance id -> statement embedded in every verdict
PROVENANCE = {
    "product": "A state of Schmidt rank one is a product state.",
    "sr2-classical-classical": (
        "A state of Schmidt rank two is locally equivalent to a classical-classical state, "
        "hence separable and not distillable."
    ),
    "ppt-rank-n-product-form": (
        "An m x n PPT state of rank n is a convex sum of n pure product states."
    ),
    "ppt": "A PPT state has a PSD partial transpose and cannot be distilled.",
    "sr3-npt-undistillable": (
        "Every NPT state of Schmidt rank three with both local ranks above two is 1-undistillable: "
        "all its rank-two side-A compressions are PPT."
    ),
    "two-by-n-npt": "Every 2 x n NPT state is 1-distillable.",
    "rank-at-most-max-local-rank": "Every NPT state of rank at most max(m, n) is 1-distillable.",
    "b-direct-sum": (
        "A B-direct sum is 1-distillable when one of its B-irreducible summands is; "
        "the summand witness is pulled back to the sum."
    ),
    "negative-determinant-submatrix": (
        "A principal submatrix of the partial transpose with negative determinant whose diagonal "
        "lies in two A-blocks projects the state to a 2 x n NPT state."
    ),
    "kernel-line": (
        "The kernel contains H' (x) |b> for an (M-1)-dimensional H'; the witness search is seeded "
        "with frames containing the complement of H'."
    ),
    "rank-n-plus-one-irreducible": (
        "Every B-irreducible NPT state of rank N+1 is 1-distillable."
    ),
    "search": "A Schmidt-rank-two vector with negative value on the partial transpose was found.",
    "search-exhausted": "No witness was found within the search budget.",
}


@dataclass
class Verdict:
    """
    Outcome of the decision tree

    Attributes:
        kind: VerdictKind
        provenance: Key into PROVENANCE naming the result that fired
        witness: Re-verifying witness for OneDistillable
        certificate: Additional evidence (normal forms, submatrix, spot checks,
            decomposition, search report)
        facts: Ranks, Schmidt rank and partial-transpose data of the input
        stages: Evaluated stages in order
        alarms: Outcomes contradicting a known existence result
    """
    kind: VerdictKind
    provenance: str
    witness: Optional[Witness] = None
    certificate: Dict[str, Any] = field(default_factory=dict)
    facts: Dict[str, Any] = field(default_factory=dict)
    stages: List[Dict[str, Any]] = field(default_factory=list)
    alarms: List[str] = field(default_factory=list)

    @property
    def statement(self) -> str:
        return PROVENANCE[self.provenance]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "provenance": self.provenance,
            "statement": self.statement,
            "witness": self.witness.to_dict() if self.witness else None,
            "certificate": {k: _serialize(v) for k, v in sorted(self.certificate.items())},
            "stages": self.stages,
            "alarms": self.alarms,
        }


def _serialize(value):
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, dict):
        return {k: _serialize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_serialize(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


class _Trace:
    """Stage recorder feeding the verdict and the optional run log"""

    def __init__(self, run_log: Optional[RunLog]):
        self.stages: List[Dict[str, Any]] = []
        self.run_log = run_log

    def record(self, stage: str, outcome: str, **details):
        self.stages.append({"stage": stage, "outcome": outcome})
        if self.run_log is not None:
            self.run_log.log_stage(stage, outcome, _serialize(details))
        logger.debug("stage.evaluated", stage=stage, outcome=outcome)


def state_facts(rho: BipartiteState) -> Dict[str, Any]:
    flag, lam, _ = is_npt(rho)
    sr = schmidt_rank_report(rho)
    return {
        "dims": list(rho.dims),
        "rank": rho.rank,
        "local_ranks": list(rho.local_ranks),
        "schmidt_rank": sr["schmidt_rank"],
        "schmidt_margin": sr["margin"],
        "schmidt_next_ratio": sr["next_ratio"],
        "npt": bool(flag),
        "min_gamma_eig": lam,
    }


def _distillable(facts, provenance, witness, trace, certificate=None, alarms=None) -> Verdict:
    return Verdict(VerdictKind.ONE_DISTILLABLE, provenance, witness, certificate or {}, facts,
                   trace.stages, alarms or [])


def _decide_ppt(rho: BipartiteState, facts, trace: _Trace) -> Verdict:
    sr = facts["schmidt_rank"]
    if sr == 1:
        trace.record("ppt-check", "fired", schmidt_rank=1)
        return Verdict(VerdictKind.SEPARABLE, "product", None, {}, facts, trace.stages)
    if sr == 2:
        support, _, _ = restrict_to_support(rho)
        form = cc_normal_form(support)
        trace.record("ppt-check", "fired", schmidt_rank=2, off_diag_residual=form.off_diag_residual)
        cert = {"cc_normal_form": form, "support_restricted": support.dims != rho.dims}
        return Verdict(VerdictKind.SEPARABLE, "sr2-classical-classical", None, cert, facts, trace.stages)

    ra, rb = rho.local_ranks
    if rho.rank == max(ra, rb):
        support, _, _ = restrict_to_support(rho)
        oriented = support if support.dim_a <= support.dim_b else swap_sides(support)
        try:
            form = ppt_rank_n_canonical(oriented)
            trace.record("ppt-check", "fired", product_form=True)
            return Verdict(VerdictKind.SEPARABLE, "ppt-rank-n-product-form", None,
                           {"ppt_canonical_form": form}, facts, trace.stages)
        except ContractViolation as e:
            logger.info("decision.ppt_rank_n_failed", error=str(e))
    trace.record("ppt-check", "fired")
    return Verdict(VerdictKind.PPT_UNDISTILLABLE, "ppt", None, {}, facts, trace.stages)


def _decide_direct_sum(rho: BipartiteState, facts, settings: Settings, trace: _Trace) -> Optional[Verdict]:
    tree = b_decompose(rho)
    if tree.is_leaf:
        trace.record("b-direct-sum", "irreducible", commutant_dim=tree.commutant_dim)
        return None
    trace.record("b-direct-sum", "split", parts=len(tree.leaves()), split_pass=tree.split_pass)
    summand_kinds = []
    for idx, child in enumerate(tree.children):
        summand = child.state.with_matrix(child.state.mat, normalize=True)
        if not is_npt(summand)[0]:
            summand_kinds.append("PPT")
            continue
        sub = decide(summand, settings)
        summand_kinds.append(sub.kind.value)
        if sub.kind is VerdictKind.ONE_DISTILLABLE and sub.witness is not None:
            lifted = pull_back_witness(rho, sub.witness, np.eye(rho.dim_a), child.local_factor,
                                       origin="direct-sum")
            if lifted is not None and verify_witness(rho, lifted)["ok"]:
                cert = {"decomposition": tree, "summand_index": idx, "summand_verdict": sub.to_dict()}
                return _distillable(facts, "b-direct-sum", lifted, trace, cert)
    trace.record("b-direct-sum-summands", "no-distillable-summand", summands=summand_kinds)
    return None


def _decide_rank_n_plus_one(rho: BipartiteState, facts, settings: Settings, trace: _Trace) -> Verdict:
    alarms = []
    cert = negdet_search(rho, settings.negdet.k_max)
    if cert is not None and cert.witness is not None:
        trace.record("negdet", "fired", k=len(cert.indices))
        return _distillable(facts, "negative-determinant-submatrix", cert.witness, trace,
                            {"submatrix": cert})
    trace.record("negdet", "miss")

    starts = []
    line = kernel_line_criterion(rho, settings.product_search)
    if line is not None:
        outcome = run_witness_search(rho, 1, settings.search, kernel_line_starts(line))
        trace.record("kernel-line", "fired" if outcome.witness else "no-witness")
        if outcome.witness is not None:
            return _distillable(facts, "kernel-line", outcome.witness, trace,
                                {"kernel_line": line, "search": outcome.report()})
        alarms.append("kernel-line hypothesis holds but the seeded search found no witness")
    else:
        trace.record("kernel-line", "miss")

    hit = range_product_vector(rho, settings.product_search)
    if hit is not None:
        for k in range(rho.dim_a):
            e = np.zeros(rho.dim_a, dtype=complex)
            e[k] = 1.0
            other = e - hit.a * np.vdot(hit.a, e)
            if np.linalg.norm(other) > 1e-6:
                starts.append(('A', np.column_stack([hit.a, nk.normalized(other)])))
    trace.record("range-product-vector", "found" if hit else "miss")

    outcome = run_witness_search(rho, 1, settings.search, starts)
    trace.record("search", "found" if outcome.witness else "exhausted", best_value=outcome.best_value)
    if outcome.witness is not None:
        cert = {"search": outcome.report()}
        if hit is not None:
            cert["range_product_vector"] = hit
        return _distillable(facts, "rank-n-plus-one-irreducible", outcome.witness, trace, cert, alarms)

    if min(rho.local_ranks) > 3:
        alarms.append("B-irreducible NPT state of rank N+1 without a witness contradicts a proven existence result")
    if hit is not None:
        alarms.append("range contains a product vector but no witness was found")
    return Verdict(VerdictKind.UNKNOWN, "search-exhausted", None, {"search": outcome.report()},
                   facts, trace.stages, alarms)


def decide(rho: BipartiteState, settings: Optional[Settings] = None,
           run_log: Optional[RunLog] = None) -> Verdict:
    """
    Ordered decision pipeline

    1. PPT: Separable when the Schmidt rank is at most two (cc normal form)
       or a rank-n product form exists, else PPTUndistillable.
    2. NPT, Schmidt rank three, both local ranks above two: OneUndistillableNPT.
    3. A local rank equal to two: exact 2 x n witness.
    4. Rank at most the larger local rank: witness search.
    5. B-direct sums: recurse on NPT summands and pull the witness back.
    6. Rank N+1 and B-irreducible: negative-determinant submatrix, kernel
       line, range product vector, then full search.
    7. Otherwise: witness search, OneDistillable or Unknown.

    Args:
        rho: State to classify
        settings: Budgets and tolerances (defaults when omitted)
        run_log: Optional per-run JSONL log receiving every stage

    Returns:
        Verdict
    """
    settings = settings or Settings()
    trace = _Trace(run_log)
    facts = state_facts(rho)
    alarms: List[str] = []

    if not facts["npt"]:
        return _decide_ppt(rho, facts, trace)
    trace.record("ppt-check", "npt", min_gamma_eig=facts["min_gamma_eig"])

    ra, rb = rho.local_ranks
    if facts["schmidt_rank"] == 3 and min(ra, rb) > 2:
        check = sr3_compression_spot_check(rho, settings.decide.spot_checks, settings.search.seed)
        trace.record("schmidt-rank-three", "fired", **check)
        if not check["all_ppt"]:
            alarms.append("a rank-two compression of a Schmidt-rank-three state is NPT")
        return Verdict(VerdictKind.ONE_UNDISTILLABLE_NPT, "sr3-npt-undistillable", None,
                       {"compression_spot_check": check}, facts, trace.stages, alarms)
    trace.record("schmidt-rank-three", "skipped", schmidt_rank=facts["schmidt_rank"])

    if min(ra, rb) <= 2:
        witness = distill_2xn(rho)
        trace.record("two-by-n", "fired", value=witness.value)
        return _distillable(facts, "two-by-n-npt", witness, trace)

    if rho.rank <= max(ra, rb):
        outcome = run_witness_search(rho, 1, settings.search)
        trace.record("rank-at-most-max", "found" if outcome.witness else "exhausted",
                     best_value=outcome.best_value)
        if outcome.witness is not None:
            return _distillable(facts, "rank-at-most-max-local-rank", outcome.witness, trace,
                                {"search": outcome.report()})
        alarms.append("NPT state of rank at most max local rank without a witness contradicts a proven existence result")

    split = _decide_direct_sum(rho, facts, settings, trace)
    if split is not None:
        split.alarms = alarms + split.alarms
        return split

    if rho.rank == max(ra, rb) + 1:
        verdict = _decide_rank_n_plus_one(rho, facts, settings, trace)
        verdict.alarms = alarms + verdict.alarms
        return verdict

    outcome = run_witness_search(rho, 1, settings.search)
    trace.record("search", "found" if outcome.witness else "exhausted", best_value=outcome.best_value)
    if outcome.witness is not None:
        return _distillable(facts, "search", outcome.witness, trace, {"search": outcome.report()}, alarms)
    return Verdict(VerdictKind.UNKNOWN, "search-exhausted", None, {"search": outcome.report()},
                   facts, trace.stages, alarms)


def verify_verdict(rho: BipartiteState, verdict: Verdict) -> Dict[str, Any]:
    """
    Independently re-check a verdict against rho

    Returns:
        Dict with ok flag and the list of failed checks
    """
    failures = []
    flag, lam, _ = is_npt(rho)
    kind = verdict.kind

    if kind is VerdictKind.ONE_DISTILLABLE:
        if verdict.witness is None:
            failures.append("OneDistillable without a witness")
        else:
            check = verify_witness(rho, verdict.witness)
            if not check["ok"]:
                failures.extend(check["reasons"])
    elif kind in (VerdictKind.SEPARABLE, VerdictKind.PPT_UNDISTILLABLE):
        if flag:
            failures.append(f"PPT verdict on an NPT state (lambda_min={lam:.3e})")
        form = verdict.certificate.get("cc_normal_form")
        if form is not None and form.off_diag_residual > rho.pol.rank_rtol * max(1.0, rho.norm) * 10:
            failures.append(f"cc normal form off-diagonal residual {form.off_diag_residual:.3e}")
    elif kind is VerdictKind.ONE_UNDISTILLABLE_NPT:
        facts = state_facts(rho)
        if not flag or facts["schmidt_rank"] != 3 or min(facts["local_ranks"]) <= 2:
            failures.append("Schmidt-rank-three verdict preconditions do not hold")

    return {"ok": not failures, "kind": kind.value, "failures": failures}
