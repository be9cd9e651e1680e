"""
State Families

Seeded generators for random states of given rank, states of prescribed
operator Schmidt rank, B-direct sums and PPT states of rank n. Every
generator is deterministic in (parameters, seed) and verifies the labels it
promises before returning.
"""

from typing import Optional

import numpy as np
import scipy.linalg as sla
import structlog

from ..core import numkernel as nk
from ..core.state import BipartiteState
from ..errors import ContractViolation, GenerationError
from ..models.settings import TolerancePolicy
from ..analysis.schmidt import schmidt_rank
from ..analysis.witness import is_npt

logger = structlog.get_logger(__name__)

MAX_RESAMPLES = 100


def _gaussian(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    z = _gaussian(rng, d, d)
    return (z + z.conj().T) / 2


def gen_random(dim_a: int, dim_b: int, rank: int, seed: int,
               pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    """
    rho = G^dagger G for a seeded complex Gaussian rank x (M*N) matrix G

    Raises:
        GenerationError: rank outside [1, M*N], or labels unattainable after
            resampling
    """
    d = dim_a * dim_b
    if not 1 <= rank <= d:
        raise GenerationError(f"rank must lie in [1, {d}] for dims ({dim_a}, {dim_b}), got {rank}")
    expected = (min(dim_a, rank * dim_b), min(dim_b, rank * dim_a))
    for attempt in range(MAX_RESAMPLES):
        rng = nk.rng_for(seed, attempt)
        g = _gaussian(rng, rank, d)
        state = BipartiteState(g.conj().T @ g, dim_a, dim_b, pol, normalize=True,
                               meta={"family": "random", "seed": seed, "rank": rank})
        if state.rank == rank and state.local_ranks == expected:
            return state
    raise GenerationError(f"gen_random({dim_a}, {dim_b}, {rank}) failed after {MAX_RESAMPLES} resamples")


def gen_schmidt_rank(dim_a: int, dim_b: int, sr: int, seed: int,
                     npt_wanted: Optional[bool] = None, attempts: int = 400,
                     pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    """
    Rejection sampler for states of operator Schmidt rank exactly `sr`

    rho = I (x) B_1 + eps * sum_{j>1} A_j (x) B_j with B_1 positive definite
    and random Hermitian A_j, B_j. eps is drawn up to the largest value
    keeping rho PSD (alternate attempts sit on the boundary, where NPT
    states are most frequent).

    Args:
        npt_wanted: True keeps only NPT samples, False only PPT, None any

    Raises:
        GenerationError: No acceptable sample within `attempts`, reported
            with the acceptance statistics
    """
    if not 1 <= sr <= min(dim_a ** 2, dim_b ** 2):
        raise GenerationError(f"Schmidt rank must lie in [1, {min(dim_a ** 2, dim_b ** 2)}], got {sr}")

    rejected = {"schmidt_rank": 0, "npt_filter": 0, "ppt_violation": 0}
    for attempt in range(attempts):
        rng = nk.rng_for(seed, attempt)
        g = _gaussian(rng, dim_b, dim_b)
        b1 = g @ g.conj().T + 0.1 * np.eye(dim_b)
        x = np.kron(np.eye(dim_a), b1)
        y = sum(np.kron(_random_hermitian(rng, dim_a), _random_hermitian(rng, dim_b)) for _ in range(sr - 1))
        if sr == 1:
            mat = x
        else:
            mu = _generalized_top(-y, x)
            eps_max = 1.0 / mu if mu > 0 else 1.0
            fraction = 1.0 if attempt % 2 == 1 else float(rng.uniform(0.3, 0.99))
            mat = x + fraction * eps_max * y
        mat = (mat + mat.conj().T) / 2
        lam_min = float(np.linalg.eigvalsh(mat)[0])
        if lam_min < 0:
            mat = mat - lam_min * np.eye(mat.shape[0])
        state = BipartiteState(mat, dim_a, dim_b, pol, normalize=True,
                               meta={"family": "schmidt-rank", "seed": seed, "schmidt_rank": sr})
        if schmidt_rank(state) != sr:
            rejected["schmidt_rank"] += 1
            continue
        flag = is_npt(state)[0]
        if sr <= 2 and flag:
            rejected["ppt_violation"] += 1
            raise GenerationError(f"Schmidt-rank-{sr} sample is NPT (seed {seed}, attempt {attempt})")
        if npt_wanted is not None and flag != npt_wanted:
            rejected["npt_filter"] += 1
            continue
        logger.info("generator.accepted", family="schmidt-rank", sr=sr, attempts=attempt + 1,
                    acceptance_rate=1.0 / (attempt + 1))
        state.meta["npt"] = bool(flag)
        state.meta["attempts"] = attempt + 1
        return state

    logger.warning("generator.exhausted", family="schmidt-rank", sr=sr, npt_wanted=npt_wanted, **rejected)
    raise GenerationError(
        f"gen_schmidt_rank({dim_a}, {dim_b}, {sr}, npt_wanted={npt_wanted}) accepted 0 of {attempts} "
        f"samples (rejections: {rejected})"
    )


def _generalized_top(a: np.ndarray, b: np.ndarray) -> float:
    """Largest mu with a v = mu b v for Hermitian a and positive definite b"""
    return float(sla.eigh(a, b, eigvals_only=True)[-1])


def b_summand(part: BipartiteState, dim_a: int, dim_b: int, offset: int, weight: float) -> np.ndarray:
    """weight * part on the leading A coordinates and the B coordinates from offset on"""
    va = np.eye(dim_a)[:, :part.dim_a]
    vb = np.eye(dim_b)[:, offset:offset + part.dim_b]
    k = np.kron(va, vb)
    return weight * (k @ (part.mat / part.trace) @ k.conj().T)


def gen_b_reducible(rho1: BipartiteState, rho2: BipartiteState, weight: float = 0.5) -> BipartiteState:
    """
    weight * rho1 (+)_B (1 - weight) * rho2 on orthogonal B supports

    Side A is the larger of the two; side B has dimension N1 + N2.
    """
    if not 0.0 < weight < 1.0:
        raise ContractViolation(f"weight must lie in (0, 1), got {weight}")
    m = max(rho1.dim_a, rho2.dim_a)
    n = rho1.dim_b + rho2.dim_b
    out = (b_summand(rho1, m, n, 0, weight)
           + b_summand(rho2, m, n, rho1.dim_b, 1.0 - weight))
    return BipartiteState(out, m, n, rho1.pol, meta={
        "family": "b-reducible",
        "split": [rho1.dim_b, rho2.dim_b],
        "weight": weight,
        "b_irreducible": False,
    })


def gen_ppt_rank_n(m: int, n: int, seed: int, pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    """
    Mixture of n random pure product states with Dirichlet weights

    Raises:
        GenerationError: m > n (swap sides instead), or resampling failure
    """
    if m > n:
        raise GenerationError(f"gen_ppt_rank_n needs m <= n, got ({m}, {n})")
    for attempt in range(MAX_RESAMPLES):
        rng = nk.rng_for(seed, attempt)
        weights = rng.dirichlet(np.ones(n))
        mat = np.zeros((m * n, m * n), dtype=complex)
        for w in weights:
            v = np.kron(nk.normalized(_gaussian(rng, m)), nk.normalized(_gaussian(rng, n)))
            mat += w * np.outer(v, v.conj())
        state = BipartiteState(mat, m, n, pol, normalize=True,
                               meta={"family": "ppt-rank-n", "seed": seed, "rank": n})
        if state.rank == n and state.local_ranks == (m, n) and not is_npt(state)[0]:
            return state
    raise GenerationError(f"gen_ppt_rank_n({m}, {n}) failed after {MAX_RESAMPLES} resamples")
