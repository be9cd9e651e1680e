"""
Operator Schmidt Decompositions

Generic (realignment SVD) and Hermitian (real SVD over a Hermitian operator
basis) decompositions rho = sum_j sigma_j A_j (x) B_j, operator and vector
Schmidt ranks, the operator spaces A and B of a state, and decompositions
completed from prescribed side matrices.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core import numkernel as nk
from ..core.state import BipartiteState, StateOrMatrix, _dims_of, encode_matrix
from ..errors import ContractViolation
from ..models.settings import TolerancePolicy

SIDES = ('A', 'B')


@dataclass(frozen=True)
class SchmidtDecomposition:
    """
    sum_j coefficients[j] * a_terms[j] (x) b_terms[j]

    Attributes:
        coefficients: Positive reals (all ones for completed decompositions)
        a_terms: M x M side-A matrices
        b_terms: N x N side-B matrices
        hermitian: Every side matrix is Hermitian
        orthonormal: Side matrices are Hilbert-Schmidt orthonormal on both sides
        margin: (sigma_k / sigma_1, sigma_{k+1} / sigma_1) at the truncation
    """
    coefficients: np.ndarray
    a_terms: Tuple[np.ndarray, ...]
    b_terms: Tuple[np.ndarray, ...]
    hermitian: bool
    orthonormal: bool = True
    margin: Tuple[float, float] = (1.0, 0.0)

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return sum(c * np.kron(a, b) for c, a, b in zip(self.coefficients, self.a_terms, self.b_terms))

    def side(self, side: str) -> Tuple[np.ndarray, ...]:
        return self.a_terms if side == 'A' else self.b_terms

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rank": self.rank,
            "hermitian": self.hermitian,
            "coefficients": [float(c) for c in self.coefficients],
            "margin": {"kept": self.margin[0], "next": self.margin[1]},
            "a_terms": [encode_matrix(a) for a in self.a_terms],
            "b_terms": [encode_matrix(b) for b in self.b_terms],
        }


@dataclass(frozen=True)
class OperatorSubspace:
    """Orthonormal basis of the operator space A or B of a state"""
    side: str
    basis: Tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        return np.array([np.vdot(b, x) for b in self.basis])

    def residual(self, x: np.ndarray) -> float:
        """Distance of x from the space"""
        c = self.coordinates(x)
        proj = sum((ci * b for ci, b in zip(c, self.basis)), np.zeros_like(x, dtype=complex))
        return float(np.linalg.norm(x - proj))

    def contains(self, x: np.ndarray, pol: TolerancePolicy = nk.DEFAULT_POLICY) -> bool:
        return self.residual(x) <= pol.zero_atol * max(1.0, float(np.linalg.norm(x))) * 10


@lru_cache(maxsize=16)
def hermitian_basis(d: int) -> np.ndarray:
    """
    Orthonormal Hermitian basis of d x d matrices (generalized Gell-Mann)

    Returns:
        d^2 x d^2 unitary whose row k is the row-major vec of basis element k;
        row 0 is the normalized identity
    """
    elements = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            elements.extend([sym, anti])
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        elements.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    p = np.array([e.ravel() for e in elements])
    p.setflags(write=False)
    return p


def realign(rho: StateOrMatrix, dims: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """
    Reshuffle rho into the M^2 x N^2 matrix R with rho = sum A (x) B
    corresponding to R = sum vec(A) vec(B)^T
    """
    m, a, b = _dims_of(rho, dims)
    return m.reshape(a, b, a, b).transpose(0, 2, 1, 3).reshape(a * a, b * b)


def _policy(rho: StateOrMatrix, pol: Optional[TolerancePolicy]) -> TolerancePolicy:
    if pol is not None:
        return pol
    return rho.pol if isinstance(rho, BipartiteState) else nk.DEFAULT_POLICY


def operator_schmidt(rho: StateOrMatrix, hermitian: bool = True,
                     dims: Optional[Tuple[int, int]] = None,
                     pol: Optional[TolerancePolicy] = None) -> SchmidtDecomposition:
    """
    Operator Schmidt decomposition

    Args:
        rho: State or raw operator (with dims)
        hermitian: Decompose over Hermitian operator bases so every side
            matrix is Hermitian
        dims: (M, N) for raw operators
        pol: Tolerance policy (defaults to the state's)

    Returns:
        SchmidtDecomposition with orthonormal sides, coefficients descending

    Raises:
        ContractViolation: hermitian=True on a non-Hermitian operator
    """
    pol = _policy(rho, pol)
    m, a, b = _dims_of(rho, dims)
    r = realign(m, (a, b))

    if not hermitian:
        u, s, v = nk.svd(r, pol=pol)
        k = nk.numeric_rank(r, pol)
        a_terms = tuple(u[:, j].reshape(a, a) for j in range(k))
        b_terms = tuple(v[:, j].conj().reshape(b, b) for j in range(k))
        return SchmidtDecomposition(s[:k].copy(), a_terms, b_terms, False, True, nk.rank_margin(s, k))

    if not nk.is_hermitian(m, pol):
        raise ContractViolation("Hermitian Schmidt decomposition needs a Hermitian operator")
    pa, pb = hermitian_basis(a), hermitian_basis(b)
    t = (pa.conj() @ r @ pb.conj().T).real
    u, s, v = nk.svd(t, pol=pol)
    u, v = u.real, v.real
    k = nk.numeric_rank(t, pol)
    a_terms = tuple((u[:, j] @ pa).reshape(a, a) for j in range(k))
    b_terms = tuple((v[:, j] @ pb).reshape(b, b) for j in range(k))
    return SchmidtDecomposition(s[:k].copy(), a_terms, b_terms, True, True, nk.rank_margin(s, k))


def schmidt_rank(rho: StateOrMatrix, dims: Optional[Tuple[int, int]] = None,
                 pol: Optional[TolerancePolicy] = None) -> int:
    """Numeric rank of the realignment"""
    return nk.numeric_rank(realign(rho, dims), _policy(rho, pol))


def schmidt_rank_report(rho: BipartiteState) -> Dict[str, Any]:
    """Schmidt rank together with the truncation margin"""
    s = np.linalg.svd(realign(rho), compute_uv=False)
    k = nk.numeric_rank(realign(rho), rho.pol)
    kept, nxt = nk.rank_margin(s, k)
    return {
        "schmidt_rank": k,
        "margin": kept,
        "next_ratio": nxt,
        "singular_values": [float(x) for x in s[:min(len(s), k + 1)]],
    }


def vector_schmidt_rank(v, dims: Tuple[int, int], pol: TolerancePolicy = nk.DEFAULT_POLICY) -> int:
    """
    Numeric rank of the M x N reshaping of a vector

    Raises:
        ContractViolation: Zero vector or wrong length
    """
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != dims[0] * dims[1]:
        raise ContractViolation(f"Vector of length {v.size} does not fit dims {dims}")
    if np.linalg.norm(v) <= pol.zero_atol:
        raise ContractViolation("Schmidt rank of the zero vector is undefined")
    return nk.numeric_rank(v.reshape(dims), pol)


def space_of(rho: BipartiteState, side: str) -> OperatorSubspace:
    """Operator space A (or B) spanned by the Schmidt side matrices"""
    _check_side(side)
    decomp = operator_schmidt(rho, hermitian=True)
    return OperatorSubspace(side, decomp.side(side))


def complete_with(rho: BipartiteState, side: str, prescribed: Sequence[np.ndarray]) -> SchmidtDecomposition:
    """
    Schmidt decomposition whose first side matrices are exactly `prescribed`

    The remaining side matrices form an orthonormal basis of the part of the
    space orthogonal to the prescribed ones. Coefficients are all one and
    the partners absorb the weights.

    Raises:
        ContractViolation: A prescribed matrix lies outside the space, or the
            prescribed matrices are linearly dependent
    """
    _check_side(side)
    pol = rho.pol
    prescribed = [np.asarray(f, dtype=complex) for f in prescribed]
    hermitian = all(nk.is_hermitian(f, pol) for f in prescribed)
    decomp = operator_schmidt(rho, hermitian=hermitian)
    own = decomp.side(side)
    partners = decomp.b_terms if side == 'A' else decomp.a_terms
    r = decomp.rank

    space = OperatorSubspace(side, own)
    coords = np.array([space.coordinates(f) for f in prescribed]).reshape(len(prescribed), r)
    for idx, f in enumerate(prescribed):
        if not space.contains(f, pol):
            raise ContractViolation(
                f"Prescribed matrix {idx} is outside operator space {side} "
                f"(residual {space.residual(f):.3e})"
            )
    if hermitian:
        coords = coords.real
    if nk.numeric_rank(coords, pol) < len(prescribed):
        raise ContractViolation("Prescribed matrices are linearly dependent")

    complement = nk.null_basis(coords.conj(), pol)
    if hermitian:
        complement = complement.real
    e = np.vstack([coords, complement.T])
    e_inv = np.linalg.inv(e)

    new_own = tuple(sum(e[m, j] * own[j] for j in range(r)) for m in range(r))
    new_own = tuple(prescribed) + new_own[len(prescribed):]
    new_partners = tuple(
        sum(decomp.coefficients[j] * e_inv[j, m] * partners[j] for j in range(r)) for m in range(r)
    )
    a_terms, b_terms = (new_own, new_partners) if side == 'A' else (new_partners, new_own)
    return SchmidtDecomposition(np.ones(r), a_terms, b_terms, hermitian, False, decomp.margin)


def _check_side(side: str):
    if side not in SIDES:
        raise ContractViolation(f"side must be 'A' or 'B', got {side!r}")
