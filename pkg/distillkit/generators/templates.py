"""
Block Templates

Rank-(N+1) states assembled from explicit C-blocks. With R = l_1 + ... + l_k
the (N+1) x N blocks read

    C_0 = [I_R 0; 0 0; 0 0]
    C_1 = [E_1 (+) ... (+) E_k, 0; 0, C131; w_1 ... w_k, 0]
    C_2 = [F_1 (+) ... (+) F_k, 0; lower rows C221 C231 / C222 C232]
    C_j = [lam_j1 I_l1 (+) ... (+) lam_jk I_lk, 0; 0, 0; 0, 0]   (j > 2)

with lower-triangular E_i, F_i and an invertible C131. The `scalar_block`
kind replaces E_i, F_i by mu_i I, nu_i I and drops every coupling into the
first R columns, which splits the state into a B-direct sum.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import structlog

from ..core import numkernel as nk
from ..core.state import BipartiteState, BlockFactor
from ..errors import ContractViolation, GenerationError
from ..models.settings import ProductSearchBudget, TolerancePolicy
from ..analysis.structure import is_b_irreducible, range_product_vector
from ..analysis.witness import is_npt, kernel_line_criterion

logger = structlog.get_logger(__name__)

TEMPLATE_KINDS = ("irreducible", "scalar_block")
MAX_RESAMPLES = 100


def _gaussian(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@dataclass(frozen=True)
class BlockTemplate:
    """
    Parameters of one C-block template

    Attributes:
        R: Size of the identity corner of C_0
        partition: (l_1, ..., l_k) with sum R
        lambdas: (M - 3) x k scalars of the blocks C_j, j > 2
        e_blocks: Lower-triangular l_i x l_i blocks of C_1
        f_blocks: Lower-triangular l_i x l_i blocks of C_2
        w: Coupling row of C_1 over the first R columns
        c131: Invertible (N - R) x (N - R) middle block of C_1
        c2_lower: (N - R + 1) x N lower rows of C_2
        kind: 'irreducible' or 'scalar_block'
        zero_column: Column 0 of every C_i, i > 0, vanishes
    """
    R: int
    partition: Tuple[int, ...]
    lambdas: np.ndarray
    e_blocks: Tuple[np.ndarray, ...]
    f_blocks: Tuple[np.ndarray, ...]
    w: np.ndarray
    c131: np.ndarray
    c2_lower: np.ndarray
    kind: str = "irreducible"
    zero_column: bool = False

    @property
    def k(self) -> int:
        return len(self.partition)

    @property
    def offsets(self) -> Tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.partition)]))

    def validate(self, dim_a: int, dim_b: int, pol: TolerancePolicy = nk.DEFAULT_POLICY):
        """
        Raises:
            ContractViolation: dimensions or template invariants do not hold
        """
        if self.kind not in TEMPLATE_KINDS:
            raise ContractViolation(f"Unknown template kind '{self.kind}', expected one of {TEMPLATE_KINDS}")
        if dim_a < 3:
            raise ContractViolation(f"Templates need M >= 3 blocks C_0, C_1, C_2, got M = {dim_a}")
        if not 1 <= self.R <= dim_b:
            raise ContractViolation(f"R must lie in [1, N] = [1, {dim_b}], got {self.R}")
        if any(l < 1 for l in self.partition) or sum(self.partition) != self.R:
            raise ContractViolation(f"Partition {self.partition} does not sum to R = {self.R}")
        if self.kind == "irreducible" and self.k < 2:
            raise ContractViolation("Irreducible templates need at least two blocks in the partition")
        if self.lambdas.shape != (dim_a - 3, self.k):
            raise ContractViolation(f"lambdas must have shape {(dim_a - 3, self.k)}, got {self.lambdas.shape}")
        if dim_a > 3:
            for r in range(self.k):
                for s in range(r + 1, self.k):
                    if np.allclose(self.lambdas[:, r], self.lambdas[:, s]):
                        raise ContractViolation(f"Blocks {r} and {s} carry identical lambda columns")
        for name, blocks in (("E", self.e_blocks), ("F", self.f_blocks)):
            if tuple(b.shape[0] for b in blocks) != self.partition:
                raise ContractViolation(f"{name} block sizes do not match partition {self.partition}")
            if any(np.abs(np.triu(b, 1)).max(initial=0.0) > 0 for b in blocks):
                raise ContractViolation(f"{name} blocks must be lower triangular")
        if self.w.shape != (self.R,):
            raise ContractViolation(f"Coupling row must have length R = {self.R}")
        middle = dim_b - self.R
        if self.c131.shape != (middle, middle):
            raise ContractViolation(f"C131 must be {middle} x {middle}, got {self.c131.shape}")
        if middle and not nk.is_invertible(self.c131, pol):
            raise ContractViolation("C131 must be invertible")
        if self.c2_lower.shape != (middle + 1, dim_b):
            raise ContractViolation(f"Lower rows of C_2 must be {(middle + 1, dim_b)}, got {self.c2_lower.shape}")

    def blocks(self, dim_a: int, dim_b: int) -> Tuple[np.ndarray, ...]:
        """The M blocks C_0 ... C_{M-1}, each (N + 1) x N"""
        n, r = dim_b, self.R
        off = self.offsets
        c = [np.zeros((n + 1, n), dtype=complex) for _ in range(dim_a)]
        c[0][:r, :r] = np.eye(r)
        for i in range(self.k):
            sl = slice(off[i], off[i + 1])
            c[1][sl, sl] = self.e_blocks[i]
            c[2][sl, sl] = self.f_blocks[i]
            for j in range(3, dim_a):
                c[j][sl, sl] = self.lambdas[j - 3, i] * np.eye(self.partition[i])
        c[1][r:n, r:n] = self.c131
        c[1][n, :r] = self.w
        c[2][r:, :] = self.c2_lower
        return tuple(c)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "R": self.R,
            "partition": list(self.partition),
            "kind": self.kind,
            "zero_column": self.zero_column,
            "lambdas": self.lambdas.real.tolist(),
        }

    @classmethod
    def sample(cls, dim_a: int, dim_b: int, rng: np.random.Generator,
               kind: str = "irreducible", zero_column: bool = False,
               R: Optional[int] = None, partition: Optional[Tuple[int, ...]] = None) -> "BlockTemplate":
        """
        Random template with default R = N - 1 and a two-block partition

        Lambda columns are drawn from distinct small integers so that the
        blocks stay well separated.
        """
        R = dim_b - 1 if R is None else R
        if partition is None:
            partition = (R // 2, R - R // 2) if R >= 2 else (R,)
        partition = tuple(int(l) for l in partition)
        k = len(partition)

        pool = np.arange(1, k + 3)
        lambdas = np.array([rng.permutation(pool)[:k] for _ in range(max(dim_a - 3, 0))], dtype=float)
        lambdas = lambdas.reshape(max(dim_a - 3, 0), k)

        if kind == "scalar_block":
            mu = rng.permutation(pool)[:k].astype(float)
            nu = rng.permutation(pool)[:k].astype(float)
            e_blocks = tuple(mu[i] * np.eye(l, dtype=complex) for i, l in enumerate(partition))
            f_blocks = tuple(nu[i] * np.eye(l, dtype=complex) for i, l in enumerate(partition))
            w = np.zeros(R, dtype=complex)
        else:
            e_blocks = tuple(np.tril(_gaussian(rng, l, l)) for l in partition)
            f_blocks = tuple(np.tril(_gaussian(rng, l, l)) for l in partition)
            w = _gaussian(rng, R)

        middle = dim_b - R
        c131 = _gaussian(rng, middle, middle) + 2.0 * np.eye(middle)
        c2_lower = _gaussian(rng, middle + 1, dim_b)
        if kind == "scalar_block":
            c2_lower[:, :R] = 0.0

        if zero_column:
            e_blocks = (e_blocks[0].copy(),) + e_blocks[1:]
            f_blocks = (f_blocks[0].copy(),) + f_blocks[1:]
            e_blocks[0][:, 0] = 0.0
            f_blocks[0][:, 0] = 0.0
            w[0] = 0.0
            c2_lower[:, 0] = 0.0
            if lambdas.size:
                lambdas[:, 0] = 0.0

        return cls(R=R, partition=partition, lambdas=lambdas, e_blocks=e_blocks, f_blocks=f_blocks,
                   w=w, c131=c131, c2_lower=c2_lower, kind=kind, zero_column=zero_column)

    @property
    def range_product_vector_expected(self) -> Optional[bool]:
        """False when every l_i > 1 and some w_i is nonzero, None otherwise"""
        if self.kind == "irreducible" and min(self.partition) > 1 and np.any(np.abs(self.w) > 0):
            return False
        return None


def assemble_template(t: BlockTemplate, dim_a: int, dim_b: int,
                      pol: Optional[TolerancePolicy] = None,
                      meta: Optional[Dict[str, Any]] = None) -> BipartiteState:
    """C^dagger C for the template, normalized, with the block factor attached"""
    pol = nk.optional_policy(pol)
    t.validate(dim_a, dim_b, pol)
    factor = BlockFactor(t.blocks(dim_a, dim_b))
    return BipartiteState(factor.reconstruct(), dim_a, dim_b, pol, normalize=True,
                          factor=factor, meta=meta)


def _template_labels(state: BipartiteState, t: BlockTemplate,
                     budget: ProductSearchBudget) -> Dict[str, Any]:
    irreducible, _ = is_b_irreducible(state)
    hit = range_product_vector(state, budget)
    return {
        "rank": state.rank,
        "local_ranks": list(state.local_ranks),
        "npt": bool(is_npt(state)[0]),
        "b_irreducible": bool(irreducible),
        "range_product_vector": hit is not None,
        "range_product_vector_expected": t.range_product_vector_expected,
        "kernel_line": kernel_line_criterion(state) is not None,
    }


def gen_b_irreducible_template(t: Optional[BlockTemplate], dim_a: int, dim_b: int, seed: int,
                               kind: str = "irreducible", zero_column: bool = False,
                               pol: Optional[TolerancePolicy] = None,
                               budget: Optional[ProductSearchBudget] = None) -> BipartiteState:
    """
    Rank-(N+1) template state with verified labels

    An explicit template is assembled once and must meet its intent. Without
    one, templates are sampled from rng_for(seed, attempt) until the state
    has rank N + 1, full local ranks and matches the kind: NPT and
    B-irreducible for 'irreducible', B-reducible for 'scalar_block'. With
    zero_column set, irreducibility is recorded rather than required.

    Raises:
        ContractViolation: the template violates its invariants
        GenerationError: no sample met the intent, or an explicit template missed it
    """
    pol = nk.optional_policy(pol)
    budget = budget or ProductSearchBudget(seed=seed)
    if t is not None:
        kind, zero_column = t.kind, t.zero_column

    attempts = 1 if t is not None else MAX_RESAMPLES
    for attempt in range(attempts):
        template = t if t is not None else BlockTemplate.sample(
            dim_a, dim_b, nk.rng_for(seed, attempt), kind=kind, zero_column=zero_column)
        state = assemble_template(template, dim_a, dim_b, pol)
        if state.rank != dim_b + 1 or state.local_ranks != (dim_a, dim_b):
            continue
        labels = _template_labels(state, template, budget)
        if kind == "irreducible":
            if not labels["npt"]:
                continue
            if not zero_column and not labels["b_irreducible"]:
                continue
        elif labels["b_irreducible"]:
            continue
        state.meta.update({
            "family": "b-irreducible-template",
            "seed": seed,
            "attempts": attempt + 1,
            "intent": "b-reducible" if kind == "scalar_block" else "b-irreducible",
            "template": template.to_dict(),
            **labels,
        })
        logger.info("generator.accepted", family="b-irreducible-template", kind=kind,
                    dims=[dim_a, dim_b], attempts=attempt + 1,
                    range_product_vector=labels["range_product_vector"])
        return state

    raise GenerationError(
        f"gen_b_irreducible_template({dim_a}, {dim_b}, kind={kind}, zero_column={zero_column}) "
        f"found no state meeting its intent in {attempts} attempt(s)"
    )
