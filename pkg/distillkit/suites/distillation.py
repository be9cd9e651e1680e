"""
Suites for the distillable classes: 2 x n states, rank at most the larger
local rank, negative-determinant submatrices and B-irreducible states of
rank N+1.
"""

import math

from ..errors import DistillError
from ..generators.families import gen_ppt_rank_n, gen_random, gen_schmidt_rank
from ..generators.templates import gen_b_irreducible_template
from ..models.settings import Settings
from ..analysis.decision import VerdictKind, decide, verify_verdict
from ..analysis.witness import (
    distill_2xn,
    is_npt,
    negdet_search,
    project_two_blocks,
    search_witness,
    verify_witness,
)
from .registry import SuiteResult, register, sample_npt_random, trial_seed

TWO_BY_N_RANGE = (2, 3, 4, 5)
RANK_LE_MAX_DIMS = ((2, 3), (3, 3), (3, 4), (3, 5), (4, 4), (4, 5), (5, 5))
NEGDET_DIMS = ((3, 3), (3, 4), (2, 4))
RANK_N_PLUS_ONE_DIMS = ((4, 4), (4, 5))

VALUE_ATOL = 1e-9
NPT_CEILING = -1e-10


def _search_budget(settings: Settings, seed: int):
    return settings.search.model_copy(update={"seed": seed})


@register("two-by-n", "2 x n NPT states are distilled exactly", default_trials=100)
def two_by_n(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        n = TWO_BY_N_RANGE[t % len(TWO_BY_N_RANGE)]
        seed = trial_seed(result.seed, t)
        rank = int(1 + seed % (2 * n))
        try:
            rho = sample_npt_random(2, n, rank, seed, settings)
            if rho is None:
                result.skip("no-npt-sample")
                continue
            witness = distill_2xn(rho)
        except DistillError as e:
            result.error(t, e)
            continue

        lam = is_npt(rho)[1]
        gap = abs(witness.value - lam)
        result.worst("value_gap", gap)
        result.check(gap <= VALUE_ATOL, "witness value equals lambda_min", trial=t, n=n,
                     value=witness.value, min_gamma_eig=lam)
        check = verify_witness(rho, witness)
        result.check(check["ok"], "witness re-verifies", trial=t, reasons=check["reasons"])


@register("rank-le-max", "NPT states of rank at most max local rank are distillable", default_trials=100)
def rank_le_max(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        m, n = RANK_LE_MAX_DIMS[t % len(RANK_LE_MAX_DIMS)]
        seed = trial_seed(result.seed, t)
        low, high = max(1, math.ceil(max(m, n) / min(m, n))), max(m, n) - 1
        rank = low + seed % (high - low + 1)
        try:
            rho = gen_random(m, n, rank, seed, settings.tolerance)
            flag = is_npt(rho)[0]
            result.check(flag, "rank below max local rank is NPT", trial=t, dims=[m, n], rank=rank)
            if not flag:
                continue
            witness = search_witness(rho, 1, _search_budget(settings, seed))
        except DistillError as e:
            result.error(t, e)
            continue
        result.check(witness is not None, "witness found below max rank", trial=t, dims=[m, n], rank=rank)

    for t in range(result.trials // 2):
        m, n = RANK_LE_MAX_DIMS[t % len(RANK_LE_MAX_DIMS)]
        seed = trial_seed(result.seed + 1, t)
        try:
            rho = sample_npt_random(m, n, max(m, n), seed, settings)
            if rho is None:
                result.skip("no-npt-sample-at-max")
                continue
            witness = search_witness(rho, 1, _search_budget(settings, seed))
        except DistillError as e:
            result.error(t, e)
            continue
        result.check(witness is not None, "witness found at max rank", trial=t, dims=[m, n])


@register("negdet", "Negative-determinant certificates project to NPT 2 x N states", default_trials=100)
def negdet(result: SuiteResult, settings: Settings):
    k_max = settings.negdet.k_max
    for t in range(result.trials):
        m, n = NEGDET_DIMS[t % len(NEGDET_DIMS)]
        seed = trial_seed(result.seed, t)
        try:
            rho = sample_npt_random(m, n, max(m, n), seed, settings)
            if rho is None:
                result.skip("no-npt-sample")
                continue
            cert = negdet_search(rho, k_max)
        except DistillError as e:
            result.error(t, e)
            continue
        if cert is None:
            result.count("npt_without_certificate")
            continue
        result.count("certificates")
        lam = is_npt(project_two_blocks(rho, *cert.block_pair))[1]
        result.check(lam <= NPT_CEILING, "projected state NPT", trial=t, block_pair=list(cert.block_pair),
                     min_gamma_eig=lam)
        result.check(cert.witness is not None and verify_witness(rho, cert.witness)["ok"],
                     "lifted witness re-verifies", trial=t)

    for t in range(result.trials):
        seed = trial_seed(result.seed + 1, t)
        try:
            if t % 2 == 0:
                m, n = ((2, 3), (3, 3), (3, 4))[t // 2 % 3]
                rho = gen_ppt_rank_n(m, n, seed, settings.tolerance)
            else:
                rho = gen_schmidt_rank(3, 3, 2, seed, pol=settings.tolerance)
            cert = negdet_search(rho, k_max)
        except DistillError as e:
            result.error(t, e)
            continue
        result.check(cert is None, "no certificate on PPT input", trial=t,
                     determinant=None if cert is None else cert.determinant)


@register("rank-n-plus-one", "B-irreducible NPT states of rank N+1 are distillable", default_trials=50)
def rank_n_plus_one(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        m, n = RANK_N_PLUS_ONE_DIMS[t % len(RANK_N_PLUS_ONE_DIMS)]
        seed = trial_seed(result.seed, t)
        try:
            rho = gen_b_irreducible_template(None, m, n, seed, pol=settings.tolerance,
                                             budget=settings.product_search.model_copy(update={"seed": seed}))
            verdict = decide(rho, settings)
        except DistillError as e:
            result.error(t, e)
            continue
        result.count(f"provenance:{verdict.provenance}")
        result.check(verdict.kind is VerdictKind.ONE_DISTILLABLE,
                     "rank N+1 B-irreducible NPT state distilled",
                     trial=t, dims=[m, n], kind=verdict.kind.value, alarms=verdict.alarms)
        check = verify_verdict(rho, verdict)
        result.check(check["ok"], "verdict re-verifies", trial=t, failures=check["failures"])
