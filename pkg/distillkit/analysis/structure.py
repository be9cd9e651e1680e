"""
Direct Sums and Product Vectors

B-direct-sum (and mirrored A-direct-sum) decompositions via the commutant of
the block algebra, irreducibility certificates, and searches for product
and low-Schmidt-rank vectors inside subspaces.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..core import numkernel as nk
from ..core.state import BipartiteState, kernel_basis, range_basis, swap_sides
from ..errors import ContractViolation
from ..models.settings import ProductSearchBudget, TolerancePolicy

logger = structlog.get_logger(__name__)

COMMUTANT_SEED = 20160
DISTINCT_OVERLAP = 0.99


@dataclass
class DecompositionChild:
    """
    One summand of a direct sum

    Attributes:
        state: Unnormalized summand on the root's dimensions
        range_frame: Orthonormal basis of the summand's range on the split side
        local_factor: Idempotent K_t with summand = (I (x) K_t) rho (I (x) K_t)^dagger
            (mirrored for side A)
        subtree: Further decomposition of the summand, if it split again
    """
    state: BipartiteState
    range_frame: np.ndarray
    local_factor: np.ndarray
    subtree: Optional["DecompositionTree"] = None

    @property
    def weight(self) -> float:
        return self.state.trace


@dataclass
class DecompositionTree:
    """
    Direct-sum structure of a state

    Attributes:
        root: The decomposed state
        side: 'A' or 'B'
        children: Summands (empty when the root is irreducible)
        commutant_dim: Dimension of the commutant on the orthogonal pass
        congruence_commutant_dim: Dimension after the congruence normalization
            (None when the orthogonal pass already split)
        split_pass: 'orthogonal', 'congruence' or None
    """
    root: BipartiteState
    side: str
    children: List[DecompositionChild] = field(default_factory=list)
    commutant_dim: int = 1
    congruence_commutant_dim: Optional[int] = None
    split_pass: Optional[str] = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> List[BipartiteState]:
        if self.is_leaf:
            return [self.root]
        out = []
        for child in self.children:
            out.extend(child.subtree.leaves() if child.subtree else [child.state])
        return out

    def reconstruct(self) -> np.ndarray:
        if self.is_leaf:
            return np.array(self.root.mat)
        return sum(c.state.mat for c in self.children)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "side": self.side,
            "split_pass": self.split_pass,
            "commutant_dim": self.commutant_dim,
            "congruence_commutant_dim": self.congruence_commutant_dim,
            "children": [
                {
                    "weight": c.weight,
                    "range_dim": int(c.range_frame.shape[1]),
                    "subtree": c.subtree.to_dict() if c.subtree and not c.subtree.is_leaf else None,
                }
                for c in self.children
            ],
        }


@dataclass(frozen=True)
class ProductVectorHit:
    """Unit a (x) b at distance `residual` from a subspace"""
    a: np.ndarray
    b: np.ndarray
    residual: float

    @property
    def vector(self) -> np.ndarray:
        return np.kron(self.a, self.b)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": [[float(z.real), float(z.imag)] for z in self.a],
            "b": [[float(z.real), float(z.imag)] for z in self.b],
            "residual": self.residual,
        }


def commutant_basis(generators: List[np.ndarray], pol: TolerancePolicy) -> List[np.ndarray]:
    """
    Basis of {X : XD = DX for every generator D}

    Row-major vec turns XD - DX into (I (x) D^T - D (x) I) vec(X).
    """
    r = generators[0].shape[0]
    eye = np.eye(r)
    system = np.vstack([np.kron(eye, d.T) - np.kron(d, eye) for d in generators])
    null = nk.null_basis(system, pol)
    return [null[:, k].reshape(r, r) for k in range(null.shape[1])]


def _eigenspaces(h: np.ndarray, pol: TolerancePolicy) -> List[np.ndarray]:
    values, vectors = nk.hermitian_eig(h, pol)
    spread = max(1.0, float(values[-1] - values[0]))
    gap = np.sqrt(pol.rank_rtol) * spread
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > gap:
            groups.append(vectors[:, start:i])
            start = i
    return groups


def minimal_projections(generators: List[np.ndarray], pol: TolerancePolicy) -> Tuple[List[np.ndarray], int]:
    """
    Invariant subspaces of the algebra generated by `generators`

    Eigenspaces of a seeded random Hermitian element of the commutant are
    irreducible invariant subspaces. Returns (isometries, commutant dimension).
    """
    basis = commutant_basis(generators, pol)
    if len(basis) <= 1:
        return [np.eye(generators[0].shape[0], dtype=complex)], len(basis)
    rng = nk.rng_for(COMMUTANT_SEED, len(basis))
    coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    z = sum(c * x for c, x in zip(coeffs, basis))
    spaces = _eigenspaces(z + z.conj().T, pol)
    for q in spaces:
        p = q @ q.conj().T
        for d in generators:
            if np.linalg.norm(p @ d - d @ p) > pol.rank_rtol * max(1.0, np.linalg.norm(d)) * 10:
                raise ContractViolation("Commutant projection fails to commute with a generator")
    return spaces, len(basis)


def _restricted_blocks(rho: BipartiteState) -> Tuple[np.ndarray, List[List[np.ndarray]]]:
    ub = nk.range_basis(rho.reduced_b, rho.pol)
    m = rho.dim_a
    blocks = [[ub.conj().T @ rho.block(i, j) @ ub for j in range(m)] for i in range(m)]
    return ub, blocks


def _generators(blocks: List[List[np.ndarray]]) -> List[np.ndarray]:
    """Every block rho_ij, so the set is closed under the adjoint"""
    m = len(blocks)
    return [blocks[i][j] for i in range(m) for j in range(m)]


def _split(rho: BipartiteState, ub: np.ndarray, factors: List[np.ndarray],
           frames: List[np.ndarray]) -> List[DecompositionChild]:
    eye_a = np.eye(rho.dim_a)
    children = []
    for k_small, frame in zip(factors, frames):
        k_t = ub @ k_small @ ub.conj().T
        op = np.kron(eye_a, k_t)
        summand = BipartiteState(op @ rho.mat @ op.conj().T, rho.dim_a, rho.dim_b, rho.pol,
                                 meta=rho.meta)
        children.append(DecompositionChild(summand, nk.range_basis(ub @ frame, rho.pol), k_t))
    return children


def _check_children(rho: BipartiteState, children: List[DecompositionChild]):
    pol = rho.pol
    scale = max(1.0, rho.norm)
    total = sum(c.state.mat for c in children)
    residual = np.linalg.norm(total - rho.mat)
    eye_a = np.eye(rho.dim_a)
    for t, ct in enumerate(children):
        for s, cs in enumerate(children):
            if s <= t:
                continue
            cross = np.kron(eye_a, ct.local_factor) @ rho.mat @ np.kron(eye_a, cs.local_factor).conj().T
            residual = max(residual, np.linalg.norm(cross))
    if residual > pol.rank_rtol * scale * 10:
        raise ContractViolation(f"Direct-sum split does not reconstruct the state (residual {residual:.3e})")


def b_decompose(rho: BipartiteState) -> DecompositionTree:
    """
    Finest B-direct-sum decomposition

    Orthogonal pass: invariant subspaces of the algebra generated by the
    blocks rho_ij restricted to range(rho_B). Congruence pass: the same after
    normalizing the blocks by rho_B^{-1/2}, under which every B-direct sum
    becomes orthogonal; a split found here is mapped back through the
    congruence and recorded as such.
    """
    pol = rho.pol
    ub, blocks = _restricted_blocks(rho)
    r = ub.shape[1]
    tree = DecompositionTree(root=rho, side='B')
    if r <= 1:
        return tree

    spaces, dim_orth = minimal_projections(_generators(blocks), pol)
    tree.commutant_dim = dim_orth
    if len(spaces) > 1:
        factors = [q @ q.conj().T for q in spaces]
        tree.children = _split(rho, ub, factors, spaces)
        tree.split_pass = 'orthogonal'
    else:
        rb = sum(blocks[i][i] for i in range(rho.dim_a))
        t = nk.inverse_sqrt(rb, pol)
        t_inv = np.linalg.inv(t)
        normalized = [[t @ b @ t for b in row] for row in blocks]
        spaces, dim_cong = minimal_projections(_generators(normalized), pol)
        tree.congruence_commutant_dim = dim_cong
        if len(spaces) > 1:
            factors = [t_inv @ q @ q.conj().T @ t for q in spaces]
            frames = [t_inv @ q for q in spaces]
            tree.children = _split(rho, ub, factors, frames)
            tree.split_pass = 'congruence'
        else:
            return tree

    _check_children(rho, tree.children)
    for child in tree.children:
        sub = b_decompose(child.state)
        child.subtree = None if sub.is_leaf else sub
    logger.debug("structure.split.found", side='B', parts=len(tree.children), split_pass=tree.split_pass)
    return tree


def _swap_tree(tree: DecompositionTree, original: BipartiteState) -> DecompositionTree:
    out = DecompositionTree(root=original, side='A', commutant_dim=tree.commutant_dim,
                            congruence_commutant_dim=tree.congruence_commutant_dim,
                            split_pass=tree.split_pass)
    for child in tree.children:
        state = swap_sides(child.state)
        sub = _swap_tree(child.subtree, state) if child.subtree else None
        out.children.append(DecompositionChild(state, child.range_frame, child.local_factor, sub))
    return out


def a_decompose(rho: BipartiteState) -> DecompositionTree:
    """Finest A-direct-sum decomposition (b_decompose on the swapped state)"""
    return _swap_tree(b_decompose(swap_sides(rho)), rho)


def is_b_irreducible(rho: BipartiteState) -> Tuple[bool, Dict[str, Any]]:
    """
    Returns:
        (flag, certificate) where the certificate carries the commutant
        dimensions of both passes and, on a split, the range frames
    """
    tree = b_decompose(rho)
    cert = {
        "commutant_dim": tree.commutant_dim,
        "congruence_commutant_dim": tree.congruence_commutant_dim,
        "split_pass": tree.split_pass,
        "parts": len(tree.leaves()),
    }
    if not tree.is_leaf:
        cert["range_frames"] = [c.range_frame for c in tree.children]
    return tree.is_leaf, cert


def is_a_irreducible(rho: BipartiteState) -> Tuple[bool, Dict[str, Any]]:
    return is_b_irreducible(swap_sides(rho))


def _as_frame(subspace, dims: Tuple[int, int], pol: TolerancePolicy) -> np.ndarray:
    f = np.asarray(subspace, dtype=complex)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] != dims[0] * dims[1]:
        raise ContractViolation(f"Subspace vectors have length {f.shape[0]}, expected {dims[0] * dims[1]}")
    if f.shape[1] == 0 or nk.numeric_rank(f, pol) == 0:
        raise ContractViolation("Subspace is empty")
    return nk.range_basis(f, pol)


def subspace_residual(frame: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(v - frame @ (frame.conj().T @ v)))


def _gauss_newton_low_rank(frame: np.ndarray, dims: Tuple[int, int], a: np.ndarray, bt: np.ndarray,
                           iters: int = 30) -> Tuple[np.ndarray, np.ndarray]:
    """
    Polish v = vec(A B^T) inside span(frame) by least squares on the
    bilinear residual vec(A B^T) - frame c
    """
    m, n = dims
    k = a.shape[1]
    best = (a, bt, np.inf)
    for _ in range(iters):
        v = (a @ bt).ravel()
        c = frame.conj().T @ v
        resid = v - frame @ c
        size = np.linalg.norm(v)
        rel = np.linalg.norm(resid) / size if size > 0 else np.inf
        if rel < best[2]:
            best = (a, bt, rel)
        if rel < 1e-15:
            break
        j = np.hstack([np.kron(np.eye(m), bt.T), np.kron(a, np.eye(n)), -frame])
        delta = np.linalg.lstsq(j, -resid, rcond=None)[0]
        a = a + delta[:m * k].reshape(m, k)
        bt = bt + delta[m * k:m * k + k * n].reshape(k, n)
        scale = np.sqrt(np.linalg.norm(a) / max(np.linalg.norm(bt), 1e-300))
        a, bt = a / scale, bt * scale
    return best[0], best[1]


def _alternate_product(frame: np.ndarray, dims: Tuple[int, int], a: np.ndarray,
                       max_iters: int, pol: TolerancePolicy) -> Tuple[np.ndarray, np.ndarray, float]:
    """Alternating maximization of ||frame^dagger (a (x) b)||^2"""
    m, n = dims
    f = frame.conj().T.reshape(-1, m, n)
    objective = -np.inf
    b = np.ones(n, dtype=complex) / np.sqrt(n)
    for _ in range(max_iters):
        g_a = np.einsum('kmn,m->kn', f, a)
        _, b = nk.max_eigpair(g_a.conj().T @ g_a, pol)
        g_b = np.einsum('kmn,n->km', f, b)
        value, a = nk.max_eigpair(g_b.conj().T @ g_b, pol)
        if value < objective - 1e-12:
            raise ContractViolation(f"Product search objective decreased ({objective:.15f} -> {value:.15f})")
        done = value - objective <= 1e-15
        objective = max(objective, value)
        if done:
            break
    return a, b, float(objective)


def _finish_product(frame, dims, a, b, pol) -> Optional[ProductVectorHit]:
    v = np.kron(a, b)
    residual = subspace_residual(frame, v)
    if residual > pol.zero_atol and residual < 1e-2:
        pa, pbt = _gauss_newton_low_rank(frame, dims, a[:, None], b[None, :])
        a, b = nk.normalized(pa[:, 0]), nk.normalized(pbt[0])
        residual = subspace_residual(frame, np.kron(a, b))
    if residual > pol.zero_atol:
        return None
    a, phase = nk.fix_phase(a)
    b = b * np.conj(phase[0])
    return ProductVectorHit(a, b, residual)


def _product_hits(frame: np.ndarray, dims: Tuple[int, int], budget: ProductSearchBudget,
                  pol: TolerancePolicy, want: int) -> List[ProductVectorHit]:
    m, n = dims
    hits: List[ProductVectorHit] = []

    def accept(hit: Optional[ProductVectorHit]) -> bool:
        if hit is None:
            return False
        for h in hits:
            if abs(np.vdot(h.a, hit.a) * np.vdot(h.b, hit.b)) >= DISTINCT_OVERLAP:
                return False
        hits.append(hit)
        return len(hits) >= want

    for i in range(m):
        for j in range(n):
            a = np.zeros(m, dtype=complex)
            b = np.zeros(n, dtype=complex)
            a[i] = b[j] = 1.0
            if subspace_residual(frame, np.kron(a, b)) <= pol.zero_atol:
                if accept(ProductVectorHit(a, b, subspace_residual(frame, np.kron(a, b)))):
                    return hits

    for r in range(budget.restarts):
        rng = nk.rng_for(budget.seed, r)
        a0 = nk.normalized(rng.standard_normal(m) + 1j * rng.standard_normal(m))
        a, b, _ = _alternate_product(frame, dims, a0, budget.max_iters, pol)
        if accept(_finish_product(frame, dims, a, b, pol)):
            break
    return hits


def product_vector_in(subspace, dims: Tuple[int, int], budget: Optional[ProductSearchBudget] = None,
                      pol: TolerancePolicy = nk.DEFAULT_POLICY) -> Optional[ProductVectorHit]:
    """
    Search a product vector a (x) b inside a subspace

    Args:
        subspace: Columns spanning the subspace (orthonormalized internally)
        dims: (M, N)
        budget: Seeded restarts and iteration cap
        pol: Tolerance policy

    Returns:
        Hit with residual at most zero_atol, or None

    Raises:
        ContractViolation: Empty subspace
    """
    budget = budget or ProductSearchBudget()
    frame = _as_frame(subspace, dims, pol)
    hits = _product_hits(frame, dims, budget, pol, want=1)
    if not hits:
        m, n = dims
        if frame.shape[1] >= (m - 1) * (n - 1) + 1:
            logger.warning("product_search.alarm", dims=list(dims), subspace_dim=frame.shape[1],
                           restarts=budget.restarts)
        return None
    return hits[0]


def low_sr_vector_in(subspace, dims: Tuple[int, int], k: int,
                     budget: Optional[ProductSearchBudget] = None,
                     pol: TolerancePolicy = nk.DEFAULT_POLICY) -> Optional[np.ndarray]:
    """
    Unit vector of Schmidt rank below k inside a subspace

    Alternates the (k-1)-dimensional A-frame U with the subspace vector that
    puts the most weight on U (x) C^N. k = 2 is product_vector_in.
    """
    if k < 2:
        raise ContractViolation(f"k must be at least 2, got {k}")
    budget = budget or ProductSearchBudget()
    if k == 2:
        hit = product_vector_in(subspace, dims, budget, pol)
        return hit.vector if hit else None

    frame = _as_frame(subspace, dims, pol)
    m, n = dims
    width = k - 1
    if width >= min(m, n):
        return frame[:, 0]

    def low_rank_enough(v):
        s = np.linalg.svd(v.reshape(dims), compute_uv=False)
        return s[width] <= pol.zero_atol * max(1.0, s[0])

    for r in range(budget.restarts):
        rng = nk.rng_for(budget.seed, r)
        c = nk.normalized(rng.standard_normal(frame.shape[1]) + 1j * rng.standard_normal(frame.shape[1]))
        v = frame @ c
        objective = -np.inf
        for _ in range(budget.max_iters):
            u = nk.svd(v.reshape(dims))[0][:, :width]
            proj = np.kron(u @ u.conj().T, np.eye(n))
            value, c = nk.max_eigpair(frame.conj().T @ proj @ frame, pol)
            v = frame @ c
            if value - objective <= 1e-15:
                break
            objective = value
        if not low_rank_enough(v):
            uu, s, vv = nk.svd(v.reshape(dims))
            a0 = uu[:, :width] * s[:width][None, :]
            bt0 = vv[:, :width].conj().T
            a1, bt1 = _gauss_newton_low_rank(frame, dims, a0, bt0)
            v = nk.normalized((a1 @ bt1).ravel())
            v = frame @ (frame.conj().T @ v)
            v = nk.normalized(v)
        if low_rank_enough(v):
            return v
    return None


def range_product_vector(rho: BipartiteState,
                         budget: Optional[ProductSearchBudget] = None) -> Optional[ProductVectorHit]:
    """Product vector in range(rho)"""
    return product_vector_in(range_basis(rho), rho.dims, budget, rho.pol)


def kernel_product_vectors(rho: BipartiteState, budget: Optional[ProductSearchBudget] = None,
                           count: int = 1) -> List[ProductVectorHit]:
    """Up to `count` pairwise distinct product vectors in ker(rho)"""
    budget = budget or ProductSearchBudget()
    kernel = kernel_basis(rho)
    if kernel.shape[1] == 0:
        return []
    return _product_hits(kernel, rho.dims, budget, rho.pol, want=count)
