"""
Bipartite States

Validated M x N density matrices in A-major index order (a*N + b), with the
block formalism rho = sum_ij |i><j| (x) C_i^dagger C_j, partial transpose,
reductions, kernel and local equivalence.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..errors import ContractViolation, FormatError, PSDViolationError, SingularityError
from ..models.settings import TolerancePolicy
from . import numkernel as nk


@dataclass(frozen=True)
class BlockFactor:
    """
    rho = C^dagger C with C = [C_0 ... C_{M-1}] split into R x N blocks

    Attributes:
        blocks: M matrices of shape (R, N)
    """
    blocks: Tuple[np.ndarray, ...]

    @property
    def rank(self) -> int:
        return self.blocks[0].shape[0] if self.blocks else 0

    @property
    def stacked(self) -> np.ndarray:
        """C as one R x (M*N) matrix"""
        return np.hstack(self.blocks)

    def reconstruct(self) -> np.ndarray:
        c = self.stacked
        return c.conj().T @ c

    def gram(self) -> np.ndarray:
        """[Tr C_i^dagger C_j], which equals rho_A"""
        m = len(self.blocks)
        out = np.empty((m, m), dtype=complex)
        for i in range(m):
            for j in range(m):
                out[i, j] = np.trace(self.blocks[i].conj().T @ self.blocks[j])
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"R": self.rank, "blocks": [encode_matrix(b) for b in self.blocks]}


@dataclass(frozen=True)
class LocalMap:
    """Product map S (x) W acting as rho -> (S (x) W) rho (S (x) W)^dagger"""
    s: np.ndarray
    w: np.ndarray

    @classmethod
    def identity(cls, dim_a: int, dim_b: int) -> "LocalMap":
        return cls(np.eye(dim_a, dtype=complex), np.eye(dim_b, dtype=complex))

    def invertible_flags(self, pol: TolerancePolicy = nk.DEFAULT_POLICY) -> Tuple[bool, bool]:
        return nk.is_invertible(self.s, pol), nk.is_invertible(self.w, pol)

    def inverse(self) -> "LocalMap":
        return LocalMap(np.linalg.inv(self.s), np.linalg.inv(self.w))

    def compose(self, after: "LocalMap") -> "LocalMap":
        """The map applying self first, then `after`"""
        return LocalMap(after.s @ self.s, after.w @ self.w)

    def to_dict(self) -> Dict[str, Any]:
        return {"S": encode_matrix(self.s), "W": encode_matrix(self.w)}


def encode_matrix(m: np.ndarray) -> List[List[List[float]]]:
    """Nested rows of [re, im] pairs"""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(rows) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as e:
        raise FormatError(f"Matrix entries must be [re, im] pairs: {e}")
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise FormatError(f"Matrix must be rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


class BipartiteState:
    """
    Immutable bipartite density matrix

    Attributes:
        dim_a: M, dimension of side A
        dim_b: N, dimension of side B
        mat: (M*N) x (M*N) complex matrix, read-only
        pol: Tolerance policy attached to the state
        factor: Optional attached BlockFactor
        meta: Free-form ground truth (generator labels)
    """

    def __init__(self, mat, dim_a: int, dim_b: int,
                 pol: Optional[TolerancePolicy] = None,
                 normalize: bool = False,
                 factor: Optional[BlockFactor] = None,
                 meta: Optional[Dict[str, Any]] = None):
        self.pol = nk.optional_policy(pol)
        if dim_a < 1 or dim_b < 1:
            raise FormatError(f"Dimensions must be positive, got ({dim_a}, {dim_b})")
        try:
            m = nk.as_matrix(mat, "state matrix")
        except ContractViolation as e:
            raise FormatError(str(e))
        if m.shape != (dim_a * dim_b, dim_a * dim_b):
            raise FormatError(
                f"Matrix shape {m.shape} does not match dims ({dim_a}, {dim_b})"
            )

        scale = nk.frobenius(m)
        if not nk.is_hermitian(m, self.pol):
            raise PSDViolationError("State matrix is not Hermitian within tolerance")
        m = (m + m.conj().T) / 2
        lam_min = float(np.linalg.eigvalsh(m)[0]) if m.size else 0.0
        if lam_min < -self.pol.zero_atol * max(1.0, scale):
            raise PSDViolationError(f"State has negative eigenvalue {lam_min:.3e}")
        if scale <= self.pol.zero_atol:
            raise PSDViolationError("State matrix is zero")

        if normalize:
            tr = float(np.trace(m).real)
            m = m / tr
            if factor is not None:
                factor = BlockFactor(tuple(b / np.sqrt(tr) for b in factor.blocks))

        m.setflags(write=False)
        self.dim_a = int(dim_a)
        self.dim_b = int(dim_b)
        self.mat = m
        self.factor = factor
        self.meta = dict(meta or {})

    @property
    def dims(self) -> Tuple[int, int]:
        return self.dim_a, self.dim_b

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    @property
    def norm(self) -> float:
        return nk.frobenius(self.mat)

    @cached_property
    def reduced_a(self) -> np.ndarray:
        return reduce_a(self)

    @cached_property
    def reduced_b(self) -> np.ndarray:
        return reduce_b(self)

    @cached_property
    def gamma(self) -> np.ndarray:
        return partial_transpose(self)

    @cached_property
    def rank(self) -> int:
        return nk.numeric_rank(self.mat, self.pol)

    @cached_property
    def local_ranks(self) -> Tuple[int, int]:
        return local_ranks(self)

    @cached_property
    def block_factor(self) -> BlockFactor:
        return self.factor if self.factor is not None else factor_blocks(self)

    def block(self, i: int, j: int) -> np.ndarray:
        """N x N block rho_ij = <i|rho|j>"""
        n = self.dim_b
        return self.mat[i * n:(i + 1) * n, j * n:(j + 1) * n]

    def with_matrix(self, mat, normalize: bool = True, **meta) -> "BipartiteState":
        return BipartiteState(mat, self.dim_a, self.dim_b, self.pol, normalize=normalize,
                              meta={**self.meta, **meta})

    def __repr__(self):
        return f"BipartiteState({self.dim_a}x{self.dim_b}, rank={self.rank})"


StateOrMatrix = Union[BipartiteState, np.ndarray]


def _dims_of(rho: StateOrMatrix, dims: Optional[Tuple[int, int]]) -> Tuple[np.ndarray, int, int]:
    if isinstance(rho, BipartiteState):
        return rho.mat, rho.dim_a, rho.dim_b
    if dims is None:
        raise ContractViolation("Raw matrices need explicit dims")
    return np.asarray(rho, dtype=complex), dims[0], dims[1]


def partial_transpose(rho: StateOrMatrix, dims: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """
    Transpose the A index: rho^Gamma = sum_ij |j><i| (x) rho_ij

    Accepts a BipartiteState or a raw operator with explicit dims.
    """
    m, a, b = _dims_of(rho, dims)
    return m.reshape(a, b, a, b).transpose(2, 1, 0, 3).reshape(a * b, a * b)


def reduce_a(rho: StateOrMatrix, dims: Optional[Tuple[int, int]] = None) -> np.ndarray:
    m, a, b = _dims_of(rho, dims)
    return np.einsum('ibjb->ij', m.reshape(a, b, a, b))


def reduce_b(rho: StateOrMatrix, dims: Optional[Tuple[int, int]] = None) -> np.ndarray:
    m, a, b = _dims_of(rho, dims)
    return np.einsum('aiaj->ij', m.reshape(a, b, a, b))


def local_ranks(rho: BipartiteState) -> Tuple[int, int]:
    return nk.numeric_rank(rho.reduced_a, rho.pol), nk.numeric_rank(rho.reduced_b, rho.pol)


def factor_blocks(rho: BipartiteState) -> BlockFactor:
    """
    Factor rho = C^dagger C with R = rank(rho)

    C = diag(sqrt(lambda)) V^dagger over the kept eigenpairs (largest first),
    split into M column blocks of width N.
    """
    values, vectors = nk.hermitian_eig(rho.mat, rho.pol)
    r = nk.numeric_rank(rho.mat, rho.pol)
    kept = slice(len(values) - r, len(values))
    lam = np.clip(values[kept], 0.0, None)[::-1]
    v = vectors[:, kept][:, ::-1]
    c = np.sqrt(lam)[:, None] * v.conj().T
    n = rho.dim_b
    return BlockFactor(tuple(c[:, i * n:(i + 1) * n].copy() for i in range(rho.dim_a)))


def kernel_basis(rho: BipartiteState) -> np.ndarray:
    """
    Orthonormal kernel basis as columns

    The threshold matches numeric_rank, so kernel and factor rank are
    complementary: rank + kernel dimension = M*N.
    """
    values, vectors = nk.hermitian_eig(rho.mat, rho.pol)
    r = nk.numeric_rank(rho.mat, rho.pol)
    return vectors[:, :len(values) - r]


def range_basis(rho: BipartiteState) -> np.ndarray:
    values, vectors = nk.hermitian_eig(rho.mat, rho.pol)
    r = nk.numeric_rank(rho.mat, rho.pol)
    return vectors[:, len(values) - r:][:, ::-1]


def apply_local(rho: BipartiteState, local_map: LocalMap, normalize: bool = True) -> BipartiteState:
    """
    (S (x) W) rho (S (x) W)^dagger

    Raises:
        SingularityError: If S or W is not invertible
    """
    s_ok, w_ok = local_map.invertible_flags(rho.pol)
    if not (s_ok and w_ok):
        raise SingularityError(f"Local map is singular (S invertible={s_ok}, W invertible={w_ok})")
    k = np.kron(local_map.s, local_map.w)
    return BipartiteState(k @ rho.mat @ k.conj().T, rho.dim_a, rho.dim_b, rho.pol,
                          normalize=normalize, meta=rho.meta)


def swap_sides(rho: BipartiteState) -> BipartiteState:
    """The same state viewed as N x M"""
    a, b = rho.dims
    m = rho.mat.reshape(a, b, a, b).transpose(1, 0, 3, 2).reshape(a * b, a * b)
    return BipartiteState(m, b, a, rho.pol, meta=rho.meta)


def restrict_to_support(rho: BipartiteState) -> Tuple[BipartiteState, np.ndarray, np.ndarray]:
    """
    Compress onto range(rho_A) (x) range(rho_B)

    Returns:
        (compressed state of dims equal to the local ranks, isometry U_A, isometry U_B)
    """
    ua = nk.range_basis(rho.reduced_a, rho.pol)
    ub = nk.range_basis(rho.reduced_b, rho.pol)
    k = np.kron(ua, ub)
    m = k.conj().T @ rho.mat @ k
    return BipartiteState(m, ua.shape[1], ub.shape[1], rho.pol, meta=rho.meta), ua, ub


def embed(rho: BipartiteState, ua: np.ndarray, ub: np.ndarray) -> BipartiteState:
    """Inverse of restrict_to_support for isometries ua, ub"""
    k = np.kron(ua, ub)
    return BipartiteState(k @ rho.mat @ k.conj().T, ua.shape[0], ub.shape[0], rho.pol, meta=rho.meta)


def product_state(sigma_a, sigma_b, pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    sigma_a = np.asarray(sigma_a, dtype=complex)
    sigma_b = np.asarray(sigma_b, dtype=complex)
    return BipartiteState(np.kron(sigma_a, sigma_b), sigma_a.shape[0], sigma_b.shape[0], pol, normalize=True)


def pure_state(psi, dim_a: int, dim_b: int, pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    psi = nk.normalized(np.asarray(psi, dtype=complex).ravel())
    return BipartiteState(np.outer(psi, psi.conj()), dim_a, dim_b, pol)


def bell_state(pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    """Projector onto (|00> + |11>)/sqrt(2)"""
    return pure_state([1, 0, 0, 1], 2, 2, pol)


def maximally_mixed(dim_a: int, dim_b: int, pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    d = dim_a * dim_b
    return BipartiteState(np.eye(d) / d, dim_a, dim_b, pol)
