"""
Suites for structural results: direct sums, product vectors in subspaces of
the bounding dimension and invariance under local equivalence.
"""

import numpy as np

from ..core import numkernel as nk
from ..core.state import LocalMap, apply_local
from ..errors import DistillError
from ..generators.families import b_summand, gen_b_reducible, gen_ppt_rank_n, gen_random, gen_schmidt_rank
from ..models.settings import Settings
from ..analysis.decision import decide
from ..analysis.schmidt import schmidt_rank
from ..analysis.structure import b_decompose, product_vector_in
from ..analysis.witness import is_npt
from .registry import SuiteResult, register, sample_npt_random, trial_seed

PRODUCT_VECTOR_DIMS = ((3, 3), (3, 4))
SPLIT_ATOL = 1e-8
PRODUCT_RESIDUAL = 1e-9


@register("direct-sum", "B-direct sums decompose and inherit the verdict of the NPT summand",
          default_trials=100)
def direct_sum(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        seed = trial_seed(result.seed, t)
        rng = nk.rng_for(seed)
        weight = float(rng.uniform(0.2, 0.8))
        try:
            npt_part = sample_npt_random(3, 3, 4, seed, settings)
            if npt_part is None:
                result.skip("no-npt-sample")
                continue
            ppt_part = gen_ppt_rank_n(3, 3, seed, settings.tolerance)
            composite = gen_b_reducible(npt_part, ppt_part, weight)
            tree = b_decompose(composite)
        except DistillError as e:
            result.error(t, e)
            continue

        m, n = composite.dims
        expected = (b_summand(npt_part, m, n, 0, weight), b_summand(ppt_part, m, n, 3, 1.0 - weight))
        recovered = [np.zeros_like(composite.mat), np.zeros_like(composite.mat)]
        for leaf in tree.leaves():
            mass = np.diag(leaf.reduced_b).real
            recovered[0 if mass[:3].sum() >= mass[3:].sum() else 1] += leaf.mat
        gap = max(float(np.linalg.norm(r - e)) for r, e in zip(recovered, expected))
        result.worst("split_gap", gap)
        result.check(not tree.is_leaf and gap <= SPLIT_ATOL, "split recovers the summands",
                     trial=t, gap=gap, leaves=len(tree.leaves()))

        try:
            whole, part = decide(composite, settings), decide(npt_part, settings)
        except DistillError as e:
            result.error(t, e)
            continue
        result.count(f"kind:{whole.kind.value}")
        result.check(whole.kind is part.kind, "verdict matches the NPT summand", trial=t,
                     composite=whole.kind.value, summand=part.kind.value)


@register("product-vectors", "Subspaces of dimension (M-1)(N-1)+1 contain product vectors",
          default_trials=100)
def product_vectors(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        m, n = PRODUCT_VECTOR_DIMS[t % len(PRODUCT_VECTOR_DIMS)]
        seed = trial_seed(result.seed, t)
        rng = nk.rng_for(seed)
        d = (m - 1) * (n - 1) + 1
        frame = rng.standard_normal((m * n, d)) + 1j * rng.standard_normal((m * n, d))
        budget = settings.product_search.model_copy(update={"seed": seed})
        try:
            hit = product_vector_in(frame, (m, n), budget, settings.tolerance)
        except DistillError as e:
            result.error(t, e)
            continue
        result.worst("residual", None if hit is None else hit.residual)
        result.check(hit is not None and hit.residual <= PRODUCT_RESIDUAL, "product vector found",
                     trial=t, dims=[m, n], residual=None if hit is None else hit.residual)


def _invariance_state(family: int, seed: int, settings: Settings):
    pol = settings.tolerance
    if family == 0:
        return sample_npt_random(3, 3, 2, seed, settings)
    if family == 1:
        return gen_schmidt_rank(3, 3, 2, seed, pol=pol)
    if family == 2:
        return gen_ppt_rank_n(2, 3, seed, pol)
    if family == 3:
        return gen_b_reducible(gen_random(2, 2, 1, seed, pol), gen_ppt_rank_n(2, 2, seed, pol), 0.5)
    return gen_random(2, 3, 3, seed, pol)


@register("local-invariance", "Verdicts and ranks are invariant under invertible local maps",
          default_trials=50)
def local_invariance(result: SuiteResult, settings: Settings):
    for t in range(result.trials):
        seed = trial_seed(result.seed, t)
        rng = nk.rng_for(seed, 1)
        try:
            rho = _invariance_state(t % 5, seed, settings)
            if rho is None:
                result.skip("no-npt-sample")
                continue
            local_map = LocalMap(nk.random_invertible(rho.dim_a, rng), nk.random_invertible(rho.dim_b, rng))
            image = apply_local(rho, local_map)
            before, after = decide(rho, settings), decide(image, settings)
        except DistillError as e:
            result.error(t, e)
            continue
        result.check(before.kind is after.kind, "verdict kind invariant", trial=t,
                     before=before.kind.value, after=after.kind.value)
        result.check(schmidt_rank(rho) == schmidt_rank(image), "Schmidt rank invariant", trial=t)
        result.check(rho.rank == image.rank, "matrix rank invariant", trial=t)
        result.check(is_npt(rho)[0] == is_npt(image)[0], "NPT flag invariant", trial=t)
