"""
Suites for the undistillable classes: Schmidt rank two, Schmidt rank three
and PPT states of rank n.
"""

import numpy as np

from ..core.state import apply_local
from ..errors import DistillError, GenerationError
from ..generators.families import gen_ppt_rank_n, gen_schmidt_rank
from ..models.settings import SearchBudget, Settings
from ..analysis.normal_forms import cc_normal_form, ppt_rank_n_canonical, sr3_compression_spot_check
from ..analysis.witness import is_npt, search_witness
from .registry import SuiteResult, register, trial_seed

CC_DIMS = ((2, 2), (3, 3), (3, 4), (5, 5))
SR3_DIMS = ((3, 3), (3, 4), (4, 4))
PPT_RANK_N_DIMS = ((2, 2), (2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (3, 5), (4, 4), (4, 5), (5, 5))

CC_RESIDUAL = 1e-8
PPT_FLOOR = -1e-10
COMPRESSION_FLOOR = -1e-9
SR3_COMPRESSIONS = 200
SR3_RESTARTS = 256
CANONICAL_RESIDUAL = 1e-8
CANONICAL_DEFECT = 1e-9


@register("sr2-cc", "Schmidt-rank-two states are locally classical-classical", default_trials=100)
def sr2_classical_classical(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        m, n = CC_DIMS[t % len(CC_DIMS)]
        try:
            rho = gen_schmidt_rank(m, n, 2, trial_seed(result.seed, t), pol=settings.tolerance)
            form = cc_normal_form(rho)
        except DistillError as e:
            result.error(t, e)
            continue

        scale = max(1.0, rho.norm)
        result.worst("off_diag_residual", form.off_diag_residual)
        result.check(form.off_diag_residual <= CC_RESIDUAL * scale, "off-diagonal residual",
                     trial=t, dims=[m, n], residual=form.off_diag_residual)

        lam = is_npt(apply_local(rho, form.local_map))[1]
        result.check(lam >= PPT_FLOOR, "transformed state PPT", trial=t, min_gamma_eig=lam)

        recon = sum(term.projector() for term in form.product_terms)
        residual = float(np.linalg.norm(recon - rho.mat))
        result.worst("reconstruction_residual", residual)
        result.check(residual <= CC_RESIDUAL * scale, "product decomposition reconstructs",
                     trial=t, residual=residual)


@register("sr3-undistillable", "NPT Schmidt-rank-three states are 1-undistillable", default_trials=20)
def sr3_undistillable(result: SuiteResult, settings: Settings):
    accepted = 0
    for t in range(result.trials):
        m, n = SR3_DIMS[t % len(SR3_DIMS)]
        seed = trial_seed(result.seed, t)
        try:
            rho = gen_schmidt_rank(m, n, 3, seed, npt_wanted=True, pol=settings.tolerance)
        except GenerationError:
            result.skip("no-npt-sample")
            continue
        if min(rho.local_ranks) <= 2:
            result.skip("local-rank-at-most-two")
            continue
        accepted += 1

        spot = sr3_compression_spot_check(rho, SR3_COMPRESSIONS, seed)
        worst = spot["worst_min_eig"]
        result.worst("worst_compression_eig", worst, largest=False)
        result.check(worst is None or worst >= COMPRESSION_FLOOR, "rank-two compressions PPT",
                     trial=t, dims=[m, n], worst_min_eig=worst)

        budget = SearchBudget(restarts=SR3_RESTARTS, max_iters=settings.search.max_iters,
                              seed=seed, threads=settings.search.threads)
        witness = search_witness(rho, 1, budget)
        result.check(witness is None, "no single-copy witness", trial=t, dims=[m, n],
                     value=None if witness is None else witness.value)

    result.stats["accepted"] = accepted
    result.stats["shortfall"] = result.trials - accepted


@register("ppt-rank-n", "PPT states of rank n are sums of n product states", default_trials=100)
def ppt_rank_n(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        m, n = PPT_RANK_N_DIMS[t % len(PPT_RANK_N_DIMS)]
        seed = trial_seed(result.seed, t)
        try:
            rho = gen_ppt_rank_n(m, n, seed, settings.tolerance)
            form = ppt_rank_n_canonical(rho, seed)
        except DistillError as e:
            result.error(t, e)
            continue

        result.worst("reconstruction_residual", form.reconstruction_residual)
        result.worst("commutator_defect", form.commutator_defect)
        result.worst("normality_defect", form.normality_defect)
        result.check(form.reconstruction_residual <= CANONICAL_RESIDUAL, "product terms reconstruct",
                     trial=t, dims=[m, n], residual=form.reconstruction_residual)
        result.check(form.commutator_defect <= CANONICAL_DEFECT, "blocks commute",
                     trial=t, defect=form.commutator_defect)
        result.check(form.normality_defect <= CANONICAL_DEFECT, "blocks normal",
                     trial=t, defect=form.normality_defect)
        result.check(len(form.product_terms) == rho.rank, "one product term per rank",
                     trial=t, terms=len(form.product_terms), rank=rho.rank)
