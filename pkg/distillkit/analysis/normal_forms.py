"""
Local-Equivalence Normal Forms

Constructive congruences S (x) W that expose structure:
- classical-classical (diagonal) form of Schmidt-rank-two states
- real-symmetric side-A factors for Schmidt-rank-three states (PPT proof)
- canonical product form of m x n PPT states of rank n
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import structlog
from scipy.optimize import least_squares

from ..core import numkernel as nk
from ..core.state import BipartiteState, LocalMap, apply_local, encode_matrix, partial_transpose
from ..errors import (
    ContractViolation,
    NotPPTError,
    RealificationError,
    SchmidtRankMismatch,
    SingularityError,
)
from ..models.settings import TolerancePolicy
from .schmidt import complete_with, operator_schmidt, schmidt_rank, space_of
from .witness import is_npt

logger = structlog.get_logger(__name__)

RANK_ONE_GRID = 32
RANK_ONE_POLISH = 8


@dataclass(frozen=True)
class ProductTerm:
    weight: float
    a: np.ndarray
    b: np.ndarray

    def projector(self) -> np.ndarray:
        v = np.kron(self.a, self.b)
        return self.weight * np.outer(v, v.conj())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "weight": self.weight,
            "a": [[float(z.real), float(z.imag)] for z in self.a],
            "b": [[float(z.real), float(z.imag)] for z in self.b],
        }


def _terms_matrix(terms: Sequence[ProductTerm]) -> np.ndarray:
    return sum(t.projector() for t in terms)


@dataclass(frozen=True)
class CCNormalForm:
    """
    (S (x) W) rho (S (x) W)^dagger is diagonal

    Attributes:
        local_map: The diagonalizing pair (S, W)
        diagonal: Real diagonal of the transformed (unnormalized) matrix
        off_diag_residual: Frobenius norm of its off-diagonal part
        pivot_traces: Traces of the two Hermitian side-B factors
        pivot: Index of the A-factor replaced by rho_A and of the B-factor
            replaced by rho_B (the larger |trace| of the partners)
        product_terms: Explicit separable decomposition of rho read off the diagonal
    """
    local_map: LocalMap
    diagonal: np.ndarray
    off_diag_residual: float
    pivot_traces: Tuple[float, float]
    pivot: Tuple[int, int]
    product_terms: Tuple[ProductTerm, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "form": "cc",
            "map": self.local_map.to_dict(),
            "diagonal": [float(d) for d in self.diagonal],
            "off_diag_residual": self.off_diag_residual,
            "pivot_traces": list(self.pivot_traces),
            "pivot": list(self.pivot),
            "product_terms": len(self.product_terms),
        }


@dataclass(frozen=True)
class RankOneSearch:
    """
    Rank-one Hermitian element search in an operator space

    Attributes:
        found: Whether an element with relative second singular value at most
            zero_atol was found
        element: Best element (unit Frobenius norm)
        achieved: sigma_2 / sigma_1 of the best element
        coefficients: Real coordinates in the given basis
    """
    found: bool
    element: np.ndarray
    achieved: float
    coefficients: np.ndarray


@dataclass(frozen=True)
class Sr3Form:
    """
    Congruence making every side-A Schmidt factor real symmetric

    Attributes:
        local_map: (S, I)
        rank_one: The rank-one element search behind S
        tridiagonal: Real symmetric tridiagonal image of the third factor
        gamma_symmetry_residual: ||rho' - rho'^Gamma|| of the transformed state
        min_gamma_eig: lambda_min of rho'^Gamma
    """
    local_map: LocalMap
    rank_one: RankOneSearch
    tridiagonal: np.ndarray
    gamma_symmetry_residual: float
    min_gamma_eig: float
    ppt: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "form": "sr3",
            "map": self.local_map.to_dict(),
            "rank_one_residual": self.rank_one.achieved,
            "tridiagonal": encode_matrix(self.tridiagonal),
            "gamma_symmetry_residual": self.gamma_symmetry_residual,
            "min_gamma_eig": self.min_gamma_eig,
            "ppt": self.ppt,
        }


@dataclass(frozen=True)
class PPTCanonicalForm:
    """
    rho = sum_j w_j |a_j><a_j| (x) |b_j><b_j| read off commuting normal blocks

    Attributes:
        blocks: C_i K^{-1}, normal and pairwise commuting
        local_map: (I, W) with W = K^{-dagger}, taking rho to the normalized blocks
        unitary: U diagonalizing every block simultaneously
        pivot: Which block or combination K was normalized to the identity
        product_terms: The rank-one product decomposition
    """
    blocks: Tuple[np.ndarray, ...]
    local_map: LocalMap
    unitary: np.ndarray
    pivot: str
    product_terms: Tuple[ProductTerm, ...]
    commutator_defect: float
    normality_defect: float
    diagonal_defect: float
    reconstruction_residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "form": "ppt-rank-n",
            "pivot": self.pivot,
            "product_terms": [t.to_dict() for t in self.product_terms],
            "commutator_defect": self.commutator_defect,
            "normality_defect": self.normality_defect,
            "diagonal_defect": self.diagonal_defect,
            "reconstruction_residual": self.reconstruction_residual,
        }


def _require_schmidt_rank(rho: BipartiteState, expected: int):
    sr = schmidt_rank(rho)
    if sr != expected:
        raise SchmidtRankMismatch(f"Expected Schmidt rank {expected}, got {sr}")


def _require_full_local_ranks(rho: BipartiteState):
    if rho.local_ranks != rho.dims:
        raise SingularityError(
            f"Reductions must be invertible: local ranks {rho.local_ranks}, dims {rho.dims}"
        )


def _larger_trace(traces: Sequence[float]) -> int:
    return int(np.argmax(np.abs(traces)))


def _diagonalizing_congruence(reduced: np.ndarray, other: np.ndarray, pol: TolerancePolicy) -> np.ndarray:
    """S with S reduced S^dagger = I and S other S^dagger diagonal"""
    t = nk.inverse_sqrt(reduced, pol)
    _, u = nk.hermitian_eig(t @ other @ t, pol)
    return u.conj().T @ t


def cc_normal_form(rho: BipartiteState) -> CCNormalForm:
    """
    Classical-classical form of a Schmidt-rank-two state

    Writes rho = A_1 (x) B_1 + A_2 (x) B_2 with Hermitian factors. Since
    rho_A = Tr(B_1) A_1 + Tr(B_2) A_2, the A-factor whose partner has the
    larger |trace| is replaced by rho_A and the other one is kept as A_2'.
    S = U rho_A^{-1/2} with U diagonalizing rho_A^{-1/2} A_2' rho_A^{-1/2}; W is
    built the same way on side B with the traces of the A-factors. Every
    operator in span{rho_A, A_2'} (x) span{rho_B, B_2'} then becomes diagonal.

    Raises:
        SchmidtRankMismatch: Schmidt rank is not two
        SingularityError: A reduction is singular
    """
    pol = rho.pol
    _require_schmidt_rank(rho, 2)
    _require_full_local_ranks(rho)

    herm = operator_schmidt(rho, hermitian=True)
    traces = tuple(float(np.trace(b).real) for b in herm.b_terms)
    a_traces = [float(np.trace(a).real) for a in herm.a_terms]
    c = herm.coefficients
    pivot = (_larger_trace(c * np.array(traces)), _larger_trace(c * np.array(a_traces)))

    s = _diagonalizing_congruence(rho.reduced_a, herm.a_terms[1 - pivot[0]], pol)
    w = _diagonalizing_congruence(rho.reduced_b, herm.b_terms[1 - pivot[1]], pol)

    k = np.kron(s, w)
    transformed = k @ rho.mat @ k.conj().T
    diagonal = np.diag(transformed).real.copy()
    off_diag = float(np.linalg.norm(transformed - np.diag(np.diag(transformed))))

    s_inv, w_inv = np.linalg.inv(s), np.linalg.inv(w)
    terms = []
    m, n = rho.dims
    for a in range(m):
        for b in range(n):
            d = diagonal[a * n + b]
            if d <= pol.zero_atol * rho.norm:
                continue
            va, vb = s_inv[:, a], w_inv[:, b]
            weight = d * np.linalg.norm(va) ** 2 * np.linalg.norm(vb) ** 2
            terms.append(ProductTerm(float(weight), nk.normalized(va), nk.normalized(vb)))

    logger.debug("normal_form.cc", off_diag_residual=off_diag, terms=len(terms))
    return CCNormalForm(LocalMap(s, w), diagonal, off_diag, traces, pivot, tuple(terms))


def _unit_element(basis: Sequence[np.ndarray], c: np.ndarray) -> np.ndarray:
    x = sum(ci * b for ci, b in zip(c, basis))
    return x / np.linalg.norm(x)


def _sigma_ratio(x: np.ndarray) -> float:
    s = np.sort(np.abs(np.linalg.eigvalsh((x + x.conj().T) / 2)))[::-1]
    return float(s[1] / s[0]) if len(s) > 1 and s[0] > 0 else 0.0


def _seed_coefficients(k: int, seed: int) -> List[np.ndarray]:
    if k == 2:
        return [np.array([np.cos(t), np.sin(t)]) for t in np.linspace(0, np.pi, RANK_ONE_GRID, endpoint=False)]
    if k == 3:
        seeds = []
        for theta in np.linspace(0, np.pi / 2, RANK_ONE_GRID):
            for phi in np.linspace(0, 2 * np.pi, RANK_ONE_GRID, endpoint=False):
                seeds.append(np.array([np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)]))
        return seeds
    rng = nk.rng_for(seed, k)
    return [nk.normalized(rng.standard_normal(k)) for _ in range(RANK_ONE_GRID * RANK_ONE_GRID)]


def _polish_rank_one(basis: Sequence[np.ndarray], c0: np.ndarray) -> np.ndarray:
    """
    Least squares on sum c_k E_k - s h h^dagger = 0 with ||c|| = 1,
    started from the top eigenpair of the seed element
    """
    m = basis[0].shape[0]
    k = len(basis)
    x0 = _unit_element(basis, c0)
    values, vectors = np.linalg.eigh((x0 + x0.conj().T) / 2)
    top = int(np.argmax(np.abs(values)))
    sign = 1.0 if values[top] >= 0 else -1.0
    h0 = np.sqrt(abs(values[top])) * vectors[:, top]
    stack = np.array(basis)

    def residuals(p):
        c, h = p[:k], p[k:k + m] + 1j * p[k + m:]
        diff = np.tensordot(c, stack, axes=1) - sign * np.outer(h, h.conj())
        return np.concatenate([diff.real.ravel(), diff.imag.ravel(), [c @ c - 1.0]])

    start = np.concatenate([c0 / np.linalg.norm(c0), h0.real, h0.imag])
    result = least_squares(residuals, start, method='trf', xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    return result.x[:k]


def find_rank_one_element(basis: Sequence[np.ndarray], pol: TolerancePolicy = nk.DEFAULT_POLICY,
                          seed: int = 0) -> RankOneSearch:
    """
    Search the real span of Hermitian `basis` for a rank-one element

    The unit sphere of coefficients (a hemisphere, since c and -c give the
    same rank) is grid-seeded, the best seeds are polished by least squares,
    and the best polished element is reported together with its achieved
    sigma_2 / sigma_1.
    """
    basis = [np.asarray(b, dtype=complex) for b in basis]
    seeds = _seed_coefficients(len(basis), seed)
    scored = sorted(range(len(seeds)), key=lambda i: (_sigma_ratio(_unit_element(basis, seeds[i])), i))

    best_c, best_ratio = seeds[scored[0]], _sigma_ratio(_unit_element(basis, seeds[scored[0]]))
    for idx in scored[:RANK_ONE_POLISH]:
        if best_ratio <= pol.zero_atol:
            break
        try:
            c = _polish_rank_one(basis, seeds[idx])
        except (ValueError, np.linalg.LinAlgError):
            continue
        if np.linalg.norm(c) == 0:
            continue
        ratio = _sigma_ratio(_unit_element(basis, c))
        if ratio < best_ratio:
            best_c, best_ratio = c / np.linalg.norm(c), ratio

    found = best_ratio <= pol.zero_atol
    if not found:
        logger.info("normal_form.rank_one_miss", achieved=best_ratio)
    return RankOneSearch(found, _unit_element(basis, best_c), best_ratio, np.asarray(best_c, dtype=float))


def _hermitian_frame(mats: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Real Gram-Schmidt of Hermitian matrices under the trace inner product"""
    out = []
    for x in mats:
        y = np.array(x, dtype=complex)
        for e in out:
            y = y - np.vdot(e, y).real * e
        norm = np.linalg.norm(y)
        if norm > 1e-12:
            out.append(y / norm)
    return out


def sr3_tridiagonal_form(rho: BipartiteState) -> Optional[Sr3Form]:
    """
    Real symmetric side-A factors for a Schmidt-rank-three state

    After normalizing rho_A to the identity, the side-A space is searched for a
    rank-one element h h^dagger. A unitary sending h to e_0, a Householder
    tridiagonalization fixing e_0 and a diagonal phase then make all three
    factors real symmetric, so the transformed state equals its own partial
    transpose.

    Returns:
        Sr3Form, or None when no rank-one element is found

    Raises:
        SchmidtRankMismatch: Schmidt rank is not three
        SingularityError: rho_A is singular
    """
    pol = rho.pol
    _require_schmidt_rank(rho, 3)
    if rho.local_ranks[0] != rho.dim_a:
        raise SingularityError(f"rho_A must be invertible, local ranks {rho.local_ranks}")
    m = rho.dim_a

    t = nk.inverse_sqrt(rho.reduced_a, pol)
    normalized = BipartiteState(np.kron(t, np.eye(rho.dim_b)) @ rho.mat @ np.kron(t, np.eye(rho.dim_b)),
                                m, rho.dim_b, pol)
    space = space_of(normalized, 'A')
    frame = _hermitian_frame([np.eye(m) / np.sqrt(m), *space.basis])
    others = frame[1:3]

    search = find_rank_one_element(frame[:3], pol)
    if not search.found:
        logger.info("normal_form.sr3_no_rank_one", achieved=search.achieved)
        return None

    values, vectors = np.linalg.eigh(search.element)
    h = vectors[:, int(np.argmax(np.abs(values)))]
    basis = np.column_stack([h, np.eye(m, dtype=complex)])
    q0, _ = np.linalg.qr(basis)
    q0 = q0[:, :m]
    q0[:, 0] *= np.vdot(q0[:, 0], h) / abs(np.vdot(q0[:, 0], h))
    u0 = q0.conj().T

    third = _hermitian_frame([np.eye(m), search.element, *others])[2]
    rotated = u0 @ third @ u0.conj().T
    tri, q = sla.hessenberg(rotated, calc_q=True)
    phases = np.ones(m, dtype=complex)
    for k in range(m - 1):
        z = tri[k + 1, k]
        phases[k + 1] = phases[k] * (np.conj(z) / abs(z) if abs(z) > 0 else 1.0)
    d = np.diag(phases)
    s = d @ q.conj().T @ u0 @ t

    real_tri = d @ tri @ d.conj().T
    real_tri = (real_tri + real_tri.conj().T) / 2
    mapped = apply_local(rho, LocalMap(s, np.eye(rho.dim_b)), normalize=True)
    gamma = partial_transpose(mapped)
    sym_residual = float(np.linalg.norm(mapped.mat - gamma))
    lam_min = float(np.linalg.eigvalsh(gamma)[0])
    ppt = lam_min >= -pol.zero_atol * max(1.0, mapped.norm)
    if np.linalg.norm(real_tri.imag) > np.sqrt(pol.zero_atol):
        raise RealificationError(f"Tridiagonal factor keeps imaginary mass {np.linalg.norm(real_tri.imag):.3e}")
    logger.debug("normal_form.sr3", gamma_symmetry_residual=sym_residual, min_gamma_eig=lam_min)
    return Sr3Form(LocalMap(s, np.eye(rho.dim_b, dtype=complex)), search, real_tri.real,
                   sym_residual, lam_min, ppt)


def sr3_two_by_n_realify(rho: BipartiteState) -> Tuple[LocalMap, bool]:
    """
    2 x 2 congruence making all three side-A factors real symmetric

    S = D V^dagger rho_A^{-1/2}: V diagonalizes the second normalized factor
    and D = diag(1, e^{i phi}) makes the off-diagonal of the third real.

    Returns:
        (LocalMap (S, I), PPT flag of the transformed state)

    Raises:
        ContractViolation: dim_a is not 2
        SchmidtRankMismatch: Schmidt rank is not three
        RealificationError: Residual imaginary mass above tolerance
    """
    pol = rho.pol
    if rho.dim_a != 2:
        raise ContractViolation(f"sr3_two_by_n_realify needs dim_a = 2, got {rho.dim_a}")
    _require_schmidt_rank(rho, 3)
    if rho.local_ranks[0] != 2:
        raise SingularityError("rho_A must have rank 2")

    decomp = complete_with(rho, 'A', [rho.reduced_a])
    s0 = nk.inverse_sqrt(rho.reduced_a, pol)
    x2 = s0 @ decomp.a_terms[1] @ s0
    x3 = s0 @ decomp.a_terms[2] @ s0
    _, v = nk.hermitian_eig(x2, pol)
    y3 = v.conj().T @ x3 @ v
    z = y3[0, 1]
    phase = z / abs(z) if abs(z) > pol.zero_atol else 1.0
    d = np.diag([1.0, phase])
    s = d @ v.conj().T @ s0

    imag = max(float(np.linalg.norm((s @ a @ s.conj().T).imag)) for a in decomp.a_terms)
    scale = max(float(np.linalg.norm(s @ a @ s.conj().T)) for a in decomp.a_terms)
    if imag > np.sqrt(pol.zero_atol) * max(1.0, scale):
        raise RealificationError(f"Side-A factors keep imaginary mass {imag:.3e} after congruence")

    local_map = LocalMap(s, np.eye(rho.dim_b, dtype=complex))
    flag, lam, _ = is_npt(apply_local(rho, local_map))
    logger.debug("normal_form.sr3_2xn", imaginary_residual=imag, min_gamma_eig=lam)
    return local_map, not flag


def sr3_compression_spot_check(rho: BipartiteState, trials: int, seed: int = 0) -> Dict[str, Any]:
    """
    Random rank-2 side-A compressions (P^dagger (x) I) rho (P (x) I), each
    checked for a PSD partial transpose

    Returns:
        Dict with trial count, the worst minimum eigenvalue and the all-PPT flag
    """
    pol = rho.pol
    m, n = rho.dims
    worst = np.inf
    failures = 0
    for trial in range(trials):
        rng = nk.rng_for(seed, trial)
        p, _ = np.linalg.qr(rng.standard_normal((m, 2)) + 1j * rng.standard_normal((m, 2)))
        k = np.kron(p, np.eye(n))
        sub = k.conj().T @ rho.mat @ k
        tr = np.trace(sub).real
        if tr <= pol.zero_atol:
            continue
        lam = float(np.linalg.eigvalsh(partial_transpose(sub / tr, (2, n)))[0])
        worst = min(worst, lam)
        if lam < -pol.zero_atol * 10:
            failures += 1
    return {
        "trials": trials,
        "worst_min_eig": None if worst == np.inf else worst,
        "failures": failures,
        "all_ppt": failures == 0,
    }


def _pivot_candidates(blocks: Sequence[np.ndarray], seed: int) -> List[Tuple[str, np.ndarray]]:
    out = [(f"block-{i}", b) for i, b in enumerate(blocks)]
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            out.append((f"block-{i}+block-{j}", blocks[i] + blocks[j]))
    for t in range(8):
        rng = nk.rng_for(seed, t)
        g = rng.standard_normal(len(blocks)) + 1j * rng.standard_normal(len(blocks))
        out.append((f"random-{t}", sum(c * b for c, b in zip(g, blocks))))
    return out


def ppt_rank_n_canonical(rho: BipartiteState, seed: int = 0) -> PPTCanonicalForm:
    """
    Canonical product form of an m x n PPT state of rank n (m <= n)

    Factor rho = C^dagger C with n x n blocks, normalize the best-conditioned
    block (or combination) K to the identity, check the normalized blocks are
    normal and commute, diagonalize them with one unitary and read off the
    n product terms.

    Raises:
        NotPPTError: rho is NPT
        ContractViolation: m > n, rank mismatch, or normality/commutation
            defects above tolerance
    """
    pol = rho.pol
    m, n = rho.dims
    if m > n:
        raise ContractViolation(f"ppt_rank_n_canonical needs dim_a <= dim_b, got {rho.dims}; swap sides")
    flag, lam, _ = is_npt(rho)
    if flag:
        raise NotPPTError(f"State is NPT (lambda_min={lam:.3e})")
    if rho.rank != n or rho.local_ranks[1] != n:
        raise ContractViolation(f"Need rank = local rank B = {n}, got rank {rho.rank}, local ranks {rho.local_ranks}")

    blocks = rho.block_factor.blocks
    scale = max(1.0, float(np.linalg.norm(np.hstack(blocks))))
    candidates = _pivot_candidates(blocks, seed)
    conds = [np.linalg.cond(k) for _, k in candidates]
    best = int(np.argmin(conds))
    if not np.isfinite(conds[best]) or conds[best] > 1.0 / pol.rank_rtol:
        raise ContractViolation("No invertible block combination found")
    pivot, k_mat = candidates[best]
    k_inv = np.linalg.inv(k_mat)
    normalized = tuple(c @ k_inv for c in blocks)

    tol = pol.rank_rtol * scale * max(1.0, float(conds[best]))
    normality = max(float(np.linalg.norm(c @ c.conj().T - c.conj().T @ c)) for c in normalized)
    commutator = max((float(np.linalg.norm(a @ b - b @ a))
                      for i, a in enumerate(normalized) for b in normalized[i + 1:]), default=0.0)
    if normality > tol or commutator > tol:
        raise ContractViolation(
            f"Normalized blocks are not commuting normal matrices "
            f"(normality {normality:.3e}, commutator {commutator:.3e})"
        )

    rng = nk.rng_for(seed, 999)
    g = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    z = sum(c * b for c, b in zip(g, normalized))
    _, u = sla.schur(z, output='complex')
    diags = [u.conj().T @ c @ u for c in normalized]
    diagonal_defect = max(float(np.linalg.norm(d - np.diag(np.diag(d)))) for d in diags)
    if diagonal_defect > tol:
        raise ContractViolation(f"Blocks are not simultaneously diagonalizable (defect {diagonal_defect:.3e})")

    lam_rows = np.array([np.diag(d) for d in diags])
    beta = k_mat.conj().T @ u
    terms = []
    for j in range(n):
        a = lam_rows[:, j].conj()
        b = beta[:, j]
        weight = float(np.linalg.norm(a) ** 2 * np.linalg.norm(b) ** 2)
        if weight <= pol.zero_atol * rho.norm:
            continue
        terms.append(ProductTerm(weight, nk.fix_phase(nk.normalized(a))[0], nk.normalized(b)))

    residual = float(np.linalg.norm(_terms_matrix(terms) - rho.mat))
    if residual > tol:
        raise ContractViolation(f"Product terms do not reconstruct the state (residual {residual:.3e})")

    local_map = LocalMap(np.eye(m, dtype=complex), k_inv.conj().T)
    return PPTCanonicalForm(normalized, local_map, u, pivot, tuple(terms),
                            commutator, normality, diagonal_defect, residual)
