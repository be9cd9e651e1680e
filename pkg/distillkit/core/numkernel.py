"""
Numerical Kernel

Dense complex linear algebra used by every other module. All rank and zero
decisions go through a TolerancePolicy; eigenvalues come back ascending,
singular values descending, and every returned vector has its first
nonzero component real positive so certificates are bit-stable.
"""

from typing import Optional, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from ..errors import ContractViolation, SingularityError
from ..models.settings import TolerancePolicy

DEFAULT_POLICY = TolerancePolicy()

# Components below this fraction of a column's largest entry do not pick the phase
_PHASE_FLOOR = 1e-9


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex array with finite entries"""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ContractViolation(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolation(f"{name} contains NaN or Inf entries")
    return a


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def is_hermitian(m: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """Hermitian within zero_atol relative to max(1, ||m||)"""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return frobenius(m - m.conj().T) <= pol.zero_atol * max(1.0, frobenius(m))


def fix_phase(vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Make the first significant component of each column real positive

    Returns:
        (rephased columns, unit phases applied per column)
    """
    v = np.array(vectors, dtype=complex, copy=True)
    if v.ndim == 1:
        out, phases = fix_phase(v[:, None])
        return out[:, 0], phases
    phases = np.ones(v.shape[1], dtype=complex)
    for k in range(v.shape[1]):
        col = v[:, k]
        peak = np.max(np.abs(col)) if col.size else 0.0
        if peak == 0.0:
            continue
        idx = int(np.argmax(np.abs(col) > _PHASE_FLOOR * peak))
        phase = np.conj(col[idx]) / abs(col[idx])
        v[:, k] = col * phase
        phases[k] = phase
    return v, phases


def _clusters(values: np.ndarray, pol: TolerancePolicy):
    """Index ranges of numerically equal consecutive values"""
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or abs(values[i] - values[i - 1]) > pol.rank_rtol * scale:
            if i - start > 1:
                yield start, i
            start = i


def canonical_rotation(frame: np.ndarray) -> np.ndarray:
    """
    Unitary G such that frame @ G is the Gram-Schmidt basis of the
    projected coordinate vectors, taken in coordinate order

    The result depends only on the column span of `frame`, which pins down
    a basis inside degenerate eigen- or singular-value clusters.
    """
    g, r = sla.qr(frame.conj().T, mode='economic')
    diag = np.diag(r)
    mags = np.abs(diag)
    phases = np.where(mags > 0, diag / np.where(mags > 0, mags, 1.0), 1.0)
    return g * phases[None, :]


def hermitian_eig(m, pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a Hermitian matrix

    Args:
        m: Square Hermitian matrix
        pol: Tolerance policy

    Returns:
        (eigenvalues ascending, unitary eigenvector matrix)

    Raises:
        ContractViolation: If m is not square or not Hermitian
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ContractViolation(f"hermitian_eig needs a square matrix, got {m.shape}")
    if not is_hermitian(m, pol):
        raise ContractViolation("hermitian_eig input is not Hermitian within tolerance")

    values, vectors = sla.eigh((m + m.conj().T) / 2)
    for lo, hi in _clusters(values, pol):
        vectors[:, lo:hi] = vectors[:, lo:hi] @ canonical_rotation(vectors[:, lo:hi])
    vectors, _ = fix_phase(vectors)
    return values, vectors


def svd(m, full_matrices: bool = False,
        pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Singular value decomposition m = U diag(s) V^dagger

    Returns:
        (U, s descending, V); V holds right singular vectors as columns
    """
    m = as_matrix(m)
    u, s, vh = sla.svd(m, full_matrices=full_matrices, lapack_driver='gesvd')
    v = vh.conj().T
    k = len(s)
    for lo, hi in _clusters(s, pol):
        g = canonical_rotation(u[:, lo:hi])
        u[:, lo:hi] = u[:, lo:hi] @ g
        v[:, lo:hi] = v[:, lo:hi] @ g
    u_head, phases = fix_phase(u[:, :k])
    u[:, :k] = u_head
    v[:, :k] = v[:, :k] * phases[None, :]
    if full_matrices:
        u[:, k:], _ = fix_phase(u[:, k:])
        v[:, k:], _ = fix_phase(v[:, k:])
    return u, s, v


def numeric_rank(m, pol: TolerancePolicy = DEFAULT_POLICY) -> int:
    """Number of singular values above rank_rtol times the largest"""
    m = as_matrix(m)
    if m.size == 0:
        return 0
    s = sla.svdvals(m)
    if s[0] <= pol.zero_atol:
        return 0
    return int(np.sum(s > pol.rank_rtol * s[0]))


def rank_margin(values: np.ndarray, rank: int) -> Tuple[float, float]:
    """(sigma_k / sigma_1, sigma_{k+1} / sigma_1) for descending values"""
    if len(values) == 0 or values[0] == 0:
        return 0.0, 0.0
    kept = float(values[rank - 1] / values[0]) if rank > 0 else 0.0
    dropped = float(values[rank] / values[0]) if rank < len(values) else 0.0
    return kept, dropped


def det(m) -> complex:
    """Determinant from a partial-pivoting LU factorization"""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ContractViolation(f"det needs a square matrix, got {m.shape}")
    if m.shape[0] == 0:
        return 1.0 + 0.0j
    lu, piv = sla.lu_factor(m, check_finite=False)
    swaps = np.sum(piv != np.arange(len(piv)))
    return complex((-1.0) ** swaps * np.prod(np.diag(lu)))


def hermitian_det(m, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
    """Real determinant of a Hermitian matrix; the imaginary part must vanish"""
    value = det(m)
    scale = max(1.0, abs(value))
    if abs(value.imag) > pol.zero_atol * scale:
        raise ContractViolation(f"Hermitian determinant has imaginary part {value.imag:.3e}")
    return value.real


def inverse_sqrt(m, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """
    Hermitian positive definite p with p m p = identity

    Raises:
        SingularityError: If the smallest eigenvalue is at or below zero_atol
    """
    values, vectors = hermitian_eig(m, pol)
    floor = pol.zero_atol * max(1.0, float(np.max(np.abs(values))))
    if values[0] <= floor:
        raise SingularityError(f"Matrix is not positive definite (lambda_min={values[0]:.3e})")
    return (vectors * (1.0 / np.sqrt(values))[None, :]) @ vectors.conj().T


def sqrt_psd(m, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Principal square root of a PSD matrix (negative noise clipped)"""
    values, vectors = hermitian_eig(m, pol)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))[None, :]) @ vectors.conj().T


def solve(a, b, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """
    Solve a x = b for square invertible a

    Raises:
        SingularityError: If a is numerically singular
    """
    a = as_matrix(a)
    if numeric_rank(a, pol) < a.shape[0]:
        raise SingularityError("solve: coefficient matrix is numerically singular")
    return sla.solve(a, b)


def is_invertible(m, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and numeric_rank(m, pol) == m.shape[0]


def range_basis(m, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal columns spanning the numerical column space"""
    u, s, _ = svd(m, pol=pol)
    return u[:, :numeric_rank(m, pol)]


def null_basis(m, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal columns spanning the numerical null space"""
    m = as_matrix(m)
    _, _, v = svd(m, full_matrices=True, pol=pol)
    return v[:, numeric_rank(m, pol):]


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded Haar unitary"""
    if dim == 1:
        return np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(dim, random_state=rng)


def random_invertible(dim: int, rng: np.random.Generator, max_cond: float = 1e3) -> np.ndarray:
    """Seeded complex Gaussian matrix with bounded condition number"""
    while True:
        z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        if np.linalg.cond(z) < max_cond:
            return z


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Generator keyed by a root seed and a stream index path"""
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def normalized(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise ContractViolation("Cannot normalize the zero vector")
    return v / n


def min_eigpair(m, pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[float, np.ndarray]:
    values, vectors = hermitian_eig(m, pol)
    return float(values[0]), vectors[:, 0]


def max_eigpair(m, pol: TolerancePolicy = DEFAULT_POLICY) -> Tuple[float, np.ndarray]:
    values, vectors = hermitian_eig(m, pol)
    return float(values[-1]), vectors[:, -1]


def optional_policy(pol: Optional[TolerancePolicy]) -> TolerancePolicy:
    return pol if pol is not None else DEFAULT_POLICY
