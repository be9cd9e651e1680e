"""
Distillability Witnesses

NPT detection, exact 2 x n distillation, alternating-minimization search for
Schmidt-rank-two vectors with negative value on (rho^Gamma)^{(x)n}, the
negative-determinant submatrix certificate and the kernel-line criterion.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..core import numkernel as nk
from ..core.state import BipartiteState, encode_matrix
from ..errors import ContractViolation, NotNPTError
from ..models.settings import NegdetSettings, ProductSearchBudget, SearchBudget, TolerancePolicy

logger = structlog.get_logger(__name__)

MAX_GROUPED_DIM = 16
COORDINATE_START_MAX_DIM = 6
REVERIFY_ATOL = 1e-10

# A frame start: ('A', dA x 2 frame) fixes side A first, ('B', dB x 2) fixes side B first
Start = Tuple[str, np.ndarray]


@dataclass(frozen=True)
class Witness:
    """
    Schmidt-rank-two vector with negative value on (rho^Gamma)^{(x)n}

    Attributes:
        n: Number of copies
        psi: Unit vector in grouped A-major order (A_1..A_n | B_1..B_n)
        value: <psi|(rho^Gamma)^{(x)n}|psi>
        frame_a: Orthonormal columns containing the A side of psi
        frame_b: Orthonormal columns containing the B side of psi
        dims: Grouped dimensions (M^n, N^n)
    """
    n: int
    psi: np.ndarray
    value: float
    frame_a: np.ndarray
    frame_b: np.ndarray
    dims: Tuple[int, int]
    origin: str = "search"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "witness",
            "n": self.n,
            "value": self.value,
            "dims": list(self.dims),
            "origin": self.origin,
            "psi": [[float(z.real), float(z.imag)] for z in self.psi],
            "frame_a": encode_matrix(self.frame_a),
            "frame_b": encode_matrix(self.frame_b),
        }


@dataclass(frozen=True)
class SubmatrixCertificate:
    """
    Principal submatrix of rho^Gamma with negative determinant whose
    diagonal positions lie in two A-blocks

    Attributes:
        indices: Row/column indices into rho^Gamma
        determinant: Negative real determinant
        block_pair: (l, m) A-blocks hosting the indices
        projector: M x M projector |l><l| + |m><m|
        projected_min_eig: lambda_min of the projected 2 x N state's partial transpose
        witness: Witness of the projected state lifted back to rho
    """
    indices: Tuple[int, ...]
    determinant: float
    block_pair: Tuple[int, int]
    projector: np.ndarray
    projected_min_eig: float
    witness: Optional[Witness] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "submatrix",
            "indices": list(self.indices),
            "determinant": self.determinant,
            "block_pair": list(self.block_pair),
            "projected_min_eig": self.projected_min_eig,
            "witness": self.witness.to_dict() if self.witness else None,
        }


@dataclass(frozen=True)
class KernelLineEvidence:
    """
    Vector b with H' (x) b inside ker(rho) for an (M-1)-dimensional H'

    Attributes:
        b: Unit vector on side B
        hyperplane: M x (M-1) orthonormal basis of H'
        complement: Unit vector spanning the orthogonal complement of H'
        residual: Second singular value of [C_0 b ... C_{M-1} b]
        seed_kind: 'coordinate' or 'random'
    """
    b: np.ndarray
    hyperplane: np.ndarray
    complement: np.ndarray
    residual: float
    seed_kind: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "kernel-line",
            "b": [[float(z.real), float(z.imag)] for z in self.b],
            "complement": [[float(z.real), float(z.imag)] for z in self.complement],
            "residual": self.residual,
            "seed_kind": self.seed_kind,
        }


@dataclass
class SearchOutcome:
    """Result of a witness search, with the budget report"""
    witness: Optional[Witness]
    best_value: float
    starts: int
    iterations: int
    budget: SearchBudget
    n: int

    def report(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "best_value": self.best_value,
            "starts": self.starts,
            "iterations": self.iterations,
            "restarts": self.budget.restarts,
            "max_iters": self.budget.max_iters,
            "seed": self.budget.seed,
            "found": self.witness is not None,
        }


def is_npt(rho: BipartiteState) -> Tuple[bool, float, np.ndarray]:
    """
    Partial-transpose test

    Returns:
        (flag, lambda_min(rho^Gamma), corresponding unit eigenvector); flag
        is true iff lambda_min < -zero_atol * ||rho||
    """
    lam, vec = nk.min_eigpair(rho.gamma, rho.pol)
    return lam < -rho.pol.zero_atol * rho.norm, lam, vec


def witness_operator(rho: BipartiteState, n: int) -> Tuple[np.ndarray, Tuple[int, int]]:
    """
    (rho^Gamma)^{(x)n} with the cut A_1..A_n | B_1..B_n

    Raises:
        ContractViolation: n outside {1, 2}, or n = 2 with M*N above 16
    """
    g = rho.gamma
    m, nb = rho.dims
    if n == 1:
        return g, (m, nb)
    if n != 2:
        raise ContractViolation(f"Witness search supports n in (1, 2), got {n}")
    if m * nb > MAX_GROUPED_DIM:
        raise ContractViolation(f"Two-copy search needs M*N <= {MAX_GROUPED_DIM}, got {m * nb}")
    x = np.kron(g, g).reshape(m, nb, m, nb, m, nb, m, nb)
    x = x.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return x.reshape(m * m * nb * nb, m * m * nb * nb), (m * m, nb * nb)


def functional_value(x: np.ndarray, psi: np.ndarray) -> float:
    return float(np.vdot(psi, x @ psi).real)


def frames_of(psi: np.ndarray, dims: Tuple[int, int], width: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """Leading left/right Schmidt frames of a vector"""
    u, _, v = nk.svd(psi.reshape(dims))
    ka, kb = min(width, dims[0]), min(width, dims[1])
    return u[:, :ka], v[:, :kb].conj()


def _threshold(x: np.ndarray, pol: TolerancePolicy) -> float:
    return -pol.zero_atol * max(1.0, nk.frobenius(x))


def verify_witness(rho: BipartiteState, witness: Witness) -> Dict[str, Any]:
    """
    Recompute a witness from scratch against rho

    Returns:
        Dict with ok flag, recomputed value, Schmidt rank and failure reasons
    """
    pol = rho.pol
    reasons = []
    try:
        x, dims = witness_operator(rho, witness.n)
    except ContractViolation as e:
        return {"ok": False, "value": None, "schmidt_rank": None, "reasons": [str(e)]}
    psi = np.asarray(witness.psi, dtype=complex)
    if psi.size != dims[0] * dims[1]:
        return {"ok": False, "value": None, "schmidt_rank": None, "reasons": ["dimension mismatch"]}
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        reasons.append(f"psi not normalized (norm {norm:.12f})")
        psi = psi / norm
    value = functional_value(x, psi)
    sr = nk.numeric_rank(psi.reshape(dims), pol)
    if abs(value - witness.value) > REVERIFY_ATOL:
        reasons.append(f"value mismatch: stored {witness.value:.12e}, recomputed {value:.12e}")
    if not value < _threshold(x, pol):
        reasons.append(f"value {value:.3e} is not negative")
    if sr > 2:
        reasons.append(f"Schmidt rank {sr} exceeds 2")
    return {"ok": not reasons, "value": value, "schmidt_rank": sr, "reasons": reasons}


def make_witness(rho: BipartiteState, psi: np.ndarray, n: int, origin: str) -> Optional[Witness]:
    """
    Package psi as a witness after truncating it to Schmidt rank two

    Returns:
        Witness, or None when the recomputed value is not negative
    """
    x, dims = witness_operator(rho, n)
    u, s, v = nk.svd(np.asarray(psi, dtype=complex).reshape(dims))
    k = min(2, len(s))
    trunc = (u[:, :k] * s[:k][None, :]) @ v[:, :k].conj().T
    psi = nk.normalized(trunc.ravel())
    value = functional_value(x, psi)
    if not value < _threshold(x, rho.pol):
        return None
    fa, fb = frames_of(psi, dims)
    return Witness(n, psi, value, fa, fb, dims, origin)


def pull_back_witness(rho: BipartiteState, witness: Witness, s: np.ndarray, w: np.ndarray,
                      origin: str) -> Optional[Witness]:
    """
    Turn a witness of (S (x) W) rho (S (x) W)^dagger into a witness of rho

    Partial transpose maps that state to (conj(S) (x) W) rho^Gamma (...)^dagger,
    so psi is pulled back with S^T (x) W^dagger. Single-copy only.
    """
    if witness.n != 1:
        raise ContractViolation("Only single-copy witnesses can be pulled back")
    psi = np.kron(s.T, w.conj().T) @ witness.psi
    if np.linalg.norm(psi) <= rho.pol.zero_atol:
        return None
    return make_witness(rho, psi, 1, origin)


def distill_2xn(rho: BipartiteState) -> Witness:
    """
    Exact witness for states with a local rank at most two

    The minimum eigenvector of rho^Gamma already has Schmidt rank at most
    two because one side is (at most) two-dimensional.

    Raises:
        NotNPTError: If rho is PPT
        ContractViolation: If both local ranks exceed two
    """
    ra, rb = rho.local_ranks
    if min(ra, rb) > 2:
        raise ContractViolation(f"distill_2xn needs a local rank <= 2, got ({ra}, {rb})")
    flag, lam, vec = is_npt(rho)
    if not flag:
        raise NotNPTError(f"State is PPT (lambda_min={lam:.3e})")
    witness = make_witness(rho, vec, 1, "two-by-n")
    if witness is None:
        raise ContractViolation("Minimum eigenvector lost negativity after truncation")
    return witness


def _random_frame(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.standard_normal((d, min(2, d))) + 1j * rng.standard_normal((d, min(2, d)))
    q, _ = np.linalg.qr(z)
    return q


def _coordinate_frames(d: int) -> List[np.ndarray]:
    eye = np.eye(d, dtype=complex)
    if d == 1:
        return [eye]
    return [eye[:, [i, j]] for i, j in itertools.combinations(range(d), 2)]


def _half_step(x: np.ndarray, dims: Tuple[int, int], side: str, frame: np.ndarray,
               pol: TolerancePolicy) -> Tuple[float, np.ndarray]:
    """Minimize over psi in span(frame) (x) C^dB (side 'A') or C^dA (x) span(frame)"""
    da, db = dims
    k = np.kron(frame, np.eye(db)) if side == 'A' else np.kron(np.eye(da), frame)
    y = k.conj().T @ x @ k
    lam, phi = nk.min_eigpair((y + y.conj().T) / 2, pol)
    return lam, k @ phi


def _alternate(x: np.ndarray, dims: Tuple[int, int], start: Start, max_iters: int,
               pol: TolerancePolicy) -> Tuple[float, np.ndarray, int]:
    side, frame = start
    value, psi = _half_step(x, dims, side, frame, pol)
    scale = max(1.0, nk.frobenius(x))
    iters = 1
    while iters < max_iters:
        fa, fb = frames_of(psi, dims)
        side = 'B' if side == 'A' else 'A'
        new_value, new_psi = _half_step(x, dims, side, fa if side == 'A' else fb, pol)
        iters += 1
        improved = value - new_value
        if new_value <= value:
            value, psi = new_value, new_psi
        if improved <= 1e-15 * scale:
            break
    return value, psi, iters


def _build_starts(x: np.ndarray, dims: Tuple[int, int], budget: SearchBudget,
                  extra: Sequence[Start], pol: TolerancePolicy) -> List[Start]:
    da, db = dims
    starts: List[Start] = list(extra)
    if max(da, db) <= COORDINATE_START_MAX_DIM:
        starts += [('A', f) for f in _coordinate_frames(da)]
        starts += [('B', f) for f in _coordinate_frames(db)]
    _, vec = nk.min_eigpair(x, pol)
    fa, fb = frames_of(vec, dims)
    starts += [('A', fa), ('B', fb)]
    for r in range(budget.restarts):
        rng = nk.rng_for(budget.seed, r)
        if r % 2 == 0:
            starts.append(('A', _random_frame(rng, da)))
        else:
            starts.append(('B', _random_frame(rng, db)))
    return starts


def search_operator(x: np.ndarray, dims: Tuple[int, int], budget: SearchBudget,
                    pol: TolerancePolicy, extra_starts: Sequence[Start] = ()) -> Tuple[float, np.ndarray, int, int]:
    """
    Minimize <psi|X|psi> over unit psi of Schmidt rank two

    Returns:
        (best value, best psi, number of starts, total half-steps)
    """
    starts = _build_starts(x, dims, budget, extra_starts, pol)

    def run(start):
        return _alternate(x, dims, start, budget.max_iters, pol)

    if budget.threads > 1:
        with ThreadPoolExecutor(max_workers=budget.threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    best = min(range(len(results)), key=lambda i: (results[i][0], i))
    value, psi, _ = results[best]
    return value, psi, len(starts), sum(r[2] for r in results)


def run_witness_search(rho: BipartiteState, n: int = 1, budget: Optional[SearchBudget] = None,
                       extra_starts: Sequence[Start] = ()) -> SearchOutcome:
    """
    Multi-start alternating minimization over Schmidt-rank-two vectors

    Args:
        rho: State to search
        n: Copies (1 or 2)
        budget: Restarts, iterations, seed and worker count
        extra_starts: Additional frame starts, tried before the default ones

    Returns:
        SearchOutcome whose witness re-verifies against rho, or None inside
    """
    budget = budget or SearchBudget()
    x, dims = witness_operator(rho, n)
    value, psi, starts, iters = search_operator(x, dims, budget, rho.pol, extra_starts)

    witness = None
    if value < _threshold(x, rho.pol):
        candidate = make_witness(rho, psi, n, "search")
        if candidate is not None and verify_witness(rho, candidate)["ok"]:
            witness = candidate

    logger.debug("witness.search.finished", n=n, best_value=value, starts=starts,
                 iterations=iters, found=witness is not None)
    return SearchOutcome(witness, float(value), starts, iters, budget, n)


def search_witness(rho: BipartiteState, n: int = 1, budget: Optional[SearchBudget] = None,
                   extra_starts: Sequence[Start] = ()) -> Optional[Witness]:
    """Witness from run_witness_search, or None when the budget is exhausted"""
    return run_witness_search(rho, n, budget, extra_starts).witness


def project_two_blocks(rho: BipartiteState, l: int, m: int) -> BipartiteState:
    """The 2 x N state (P (x) I) rho (P (x) I) on A-blocks l and m"""
    n = rho.dim_b
    rows = np.r_[l * n:(l + 1) * n, m * n:(m + 1) * n]
    sub = rho.mat[np.ix_(rows, rows)]
    return BipartiteState(sub, 2, n, rho.pol, normalize=True)


def _embed_two_blocks(rho: BipartiteState, witness: Witness, l: int, m: int) -> Optional[Witness]:
    s = np.zeros((2, rho.dim_a), dtype=complex)
    s[0, l] = s[1, m] = 1.0
    return pull_back_witness(rho, witness, s, np.eye(rho.dim_b), "negdet")


def negdet_search(rho: BipartiteState, k_max: int = NegdetSettings().k_max) -> Optional[SubmatrixCertificate]:
    """
    First principal submatrix of rho^Gamma with negative determinant whose
    indices lie in exactly two A-blocks

    Sizes are tried in increasing order, indices lexicographically. Every hit
    is re-checked: the projected 2 x N state must be NPT.
    """
    pol = rho.pol
    g = rho.gamma
    n = rho.dim_b
    size = g.shape[0]
    for k in range(2, k_max + 1):
        combos = [c for c in itertools.combinations(range(size), k)
                  if len({i // n for i in c}) == 2]
        if not combos:
            continue
        idx = np.array(combos)
        subs = g[idx[:, :, None], idx[:, None, :]]
        dets = np.linalg.det(subs).real
        for pos in np.flatnonzero(dets < -pol.zero_atol):
            combo = combos[pos]
            l, m = sorted({i // n for i in combo})
            projected = project_two_blocks(rho, l, m)
            flag, lam, _ = is_npt(projected)
            if not flag:
                logger.warning("negdet.hit_not_npt", indices=list(combo), determinant=float(dets[pos]))
                continue
            witness = _embed_two_blocks(rho, distill_2xn(projected), l, m)
            projector = np.zeros((rho.dim_a, rho.dim_a))
            projector[l, l] = projector[m, m] = 1.0
            logger.debug("negdet.found", k=k, indices=list(combo), determinant=float(dets[pos]))
            return SubmatrixCertificate(tuple(int(i) for i in combo), float(dets[pos]), (l, m),
                                        projector, float(lam), witness)
    return None


def _line_matrix(blocks: Sequence[np.ndarray], b: np.ndarray) -> np.ndarray:
    """[C_0 b ... C_{M-1} b] as an R x M matrix"""
    return np.column_stack([c @ b for c in blocks])


def _line_evidence(rho: BipartiteState, blocks, b: np.ndarray, kind: str) -> Optional[KernelLineEvidence]:
    pol = rho.pol
    v = _line_matrix(blocks, b)
    scale = max(1.0, float(np.linalg.norm(np.hstack(blocks))))
    if np.linalg.norm(v) <= pol.zero_atol * scale:
        return None
    u, s, vv = nk.svd(v)
    second = float(s[1]) if len(s) > 1 else 0.0
    if second > pol.rank_rtol * s[0]:
        return None
    x = vv[:, 0].conj()
    hyperplane = nk.null_basis(x[None, :], pol)
    kernel_residual = max((np.linalg.norm(rho.mat @ np.kron(hyperplane[:, j], b))
                           for j in range(hyperplane.shape[1])), default=0.0)
    if kernel_residual > pol.rank_rtol * scale:
        return None
    return KernelLineEvidence(b, hyperplane, nk.normalized(x.conj()), second, kind)


def _polish_line(blocks, b: np.ndarray, iters: int, pol: TolerancePolicy) -> np.ndarray:
    r = blocks[0].shape[0]
    for _ in range(iters):
        v = _line_matrix(blocks, b)
        if np.linalg.norm(v) == 0:
            break
        u = nk.svd(v)[0][:, 0]
        p = np.eye(r) - np.outer(u, u.conj())
        h = sum(c.conj().T @ p @ c for c in blocks)
        _, new_b = nk.min_eigpair(h, pol)
        if np.linalg.norm(new_b - b * np.vdot(b, new_b)) < 1e-14:
            b = new_b
            break
        b = new_b
    return b


def kernel_line_criterion(rho: BipartiteState,
                          budget: Optional[ProductSearchBudget] = None) -> Optional[KernelLineEvidence]:
    """
    Search b with rank [C_0 b ... C_{M-1} b] <= 1

    Then x (x) b lies in ker(rho) for every x in an (M-1)-dimensional
    hyperplane H'. Seeds come from the minimal right singular vectors of the
    blocks stacked without block t (for each t), then seeded random vectors;
    each seed is polished by alternating between the leading direction u of
    the columns and the b minimizing the part of C_i b orthogonal to u.
    """
    budget = budget or ProductSearchBudget()
    pol = rho.pol
    blocks = rho.block_factor.blocks
    m, n = rho.dims
    if m < 2:
        return None

    seeds: List[Tuple[np.ndarray, str]] = []
    for t in range(m):
        others = np.vstack([blocks[i] for i in range(m) if i != t])
        _, s, v = nk.svd(others, full_matrices=True)
        seeds.append((v[:, -1], 'coordinate'))
    for r in range(budget.restarts):
        rng = nk.rng_for(budget.seed, r)
        seeds.append((nk.normalized(rng.standard_normal(n) + 1j * rng.standard_normal(n)), 'random'))

    for b, kind in seeds:
        evidence = _line_evidence(rho, blocks, b, kind)
        if evidence is None:
            polished = _polish_line(blocks, b, budget.max_iters, pol)
            evidence = _line_evidence(rho, blocks, polished, kind)
        if evidence is not None:
            logger.debug("kernel_line.found", seed_kind=kind, residual=evidence.residual)
            return evidence
    return None


def kernel_line_starts(evidence: KernelLineEvidence) -> List[Start]:
    """Side-A frames pairing the complement direction with each hyperplane vector"""
    starts = []
    for j in range(evidence.hyperplane.shape[1]):
        frame = np.column_stack([evidence.complement, evidence.hyperplane[:, j]])
        starts.append(('A', frame))
    return starts
