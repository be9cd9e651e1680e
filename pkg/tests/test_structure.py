"""
Tests for direct-sum decompositions and product vectors in subspaces
"""

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from distillkit.analysis.structure import (
    a_decompose,
    b_decompose,
    commutant_basis,
    is_a_irreducible,
    is_b_irreducible,
    kernel_product_vectors,
    low_sr_vector_in,
    product_vector_in,
    range_product_vector,
)
from distillkit.analysis.schmidt import vector_schmidt_rank
from distillkit.core import numkernel as nk
from distillkit.core import BipartiteState, LocalMap, apply_local, swap_sides
from distillkit.errors import ContractViolation
from distillkit.generators import gen_b_reducible, gen_ppt_rank_n, gen_random
from distillkit.models.settings import ProductSearchBudget, TolerancePolicy


@pytest.fixture(scope="module")
def reducible():
    first = gen_random(3, 2, 2, seed=1)
    second = gen_random(3, 2, 2, seed=2)
    return gen_b_reducible(first, second, weight=0.3)


class TestDecompose:

    def test_b_reducible_splits(self, reducible):
        tree = b_decompose(reducible)
        assert not tree.is_leaf
        assert tree.split_pass == 'orthogonal'
        assert len(tree.leaves()) == 2
        assert np.allclose(tree.reconstruct(), reducible.mat, atol=1e-10)
        assert sum(c.range_frame.shape[1] for c in tree.children) == 4
        assert sorted(round(c.weight, 8) for c in tree.children) == [0.3, 0.7]

    def test_summands_are_orthogonal_on_b(self, reducible):
        tree = b_decompose(reducible)
        first, second = (c.range_frame for c in tree.children)
        assert np.linalg.norm(first.conj().T @ second) < 1e-8

    def test_congruence_split(self, reducible, rng):
        w = nk.random_invertible(4, rng)
        k = np.kron(np.eye(3), w)
        skewed = reducible.with_matrix(k @ reducible.mat @ k.conj().T)
        tree = b_decompose(skewed)
        assert not tree.is_leaf
        assert len(tree.leaves()) == 2
        assert np.allclose(tree.reconstruct(), skewed.mat, atol=1e-9)

    def test_generic_state_is_irreducible(self):
        rho = gen_random(3, 3, 4, seed=5)
        flag, cert = is_b_irreducible(rho)
        assert flag
        assert cert["commutant_dim"] == 1
        assert cert["parts"] == 1

    def test_a_side(self, reducible):
        swapped = swap_sides(reducible)
        tree = a_decompose(swapped)
        assert tree.side == 'A'
        assert not tree.is_leaf
        assert all(leaf.dims == (4, 3) for leaf in tree.leaves())
        assert not is_a_irreducible(swapped)[0]

    def test_to_dict(self, reducible):
        doc = b_decompose(reducible).to_dict()
        assert doc["side"] == 'B'
        assert len(doc["children"]) == 2


def test_commutant_of_identity_is_everything():
    basis = commutant_basis([np.eye(3)], TolerancePolicy())
    assert len(basis) == 9


class TestProductVectors:

    def test_subspace_at_dimension_bound(self):
        rng = nk.rng_for(8)
        frame = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
        hit = product_vector_in(frame, (2, 3), ProductSearchBudget(restarts=32, seed=1))
        assert hit is not None
        assert hit.residual <= 1e-10
        assert np.linalg.norm(hit.vector) == pytest.approx(1.0)
        q, _ = np.linalg.qr(frame)
        assert np.linalg.norm(hit.vector - q @ (q.conj().T @ hit.vector)) < 1e-9

    def test_entangled_line(self):
        psi = np.zeros(9, dtype=complex)
        psi[[0, 4, 8]] = 1.0
        assert product_vector_in(psi, (3, 3), ProductSearchBudget(restarts=4)) is None

    def test_empty_subspace(self):
        with pytest.raises(ContractViolation):
            product_vector_in(np.zeros((4, 1)), (2, 2))
        with pytest.raises(ContractViolation):
            product_vector_in(np.ones((5, 1)), (2, 2))

    def test_range_of_separable_state(self):
        rho = gen_ppt_rank_n(2, 3, seed=2)
        hit = range_product_vector(rho)
        assert hit is not None
        v = hit.vector
        assert np.linalg.norm(v - rho.mat @ np.linalg.pinv(rho.mat) @ v) < 1e-8

    def test_bell_kernel(self, bell):
        hits = kernel_product_vectors(bell, count=2)
        assert len(hits) == 2
        for hit in hits:
            assert np.linalg.norm(bell.mat @ hit.vector) < 1e-10
        assert abs(np.vdot(hits[0].vector, hits[1].vector)) < 0.99

    def test_full_rank_kernel_is_empty(self, mixed):
        assert kernel_product_vectors(mixed) == []


class TestLowSchmidtRank:

    def test_finds_rank_two_vector(self):
        psi = np.zeros(9, dtype=complex)
        psi[[0, 4, 8]] = 1 / np.sqrt(3)
        other = np.zeros(9, dtype=complex)
        other[1] = 1.0
        frame = np.column_stack([psi, other])
        v = low_sr_vector_in(frame, (3, 3), 3, ProductSearchBudget(restarts=16, seed=3))
        assert v is not None
        assert vector_schmidt_rank(v, (3, 3), TolerancePolicy(rank_rtol=1e-6)) <= 2

    def test_trivial_width(self):
        v = np.arange(1, 5, dtype=complex)
        out = low_sr_vector_in(v, (2, 2), 3)
        assert np.isclose(abs(np.vdot(out, v / np.linalg.norm(v))), 1.0)

    def test_k_below_two(self):
        with pytest.raises(ContractViolation):
            low_sr_vector_in(np.eye(4)[:, :1], (2, 2), 1)


def _shift_coupled_state():
    """Positive definite 3 x 3 state whose off-diagonal blocks are the non-normal upper shift"""
    shift = np.diag([1.0, 1.0], k=1)
    mat = np.eye(9, dtype=complex)
    for i in range(3):
        for j in range(i + 1, 3):
            e = np.zeros((3, 3))
            e[i, j] = 1.0
            coupling = 0.2 * np.kron(e, shift)
            mat += coupling + coupling.conj().T
    return BipartiteState(mat, 3, 3, normalize=True)


class TestNonHermitianBlocks:

    def test_shift_coupled_state_is_irreducible(self):
        rho = _shift_coupled_state()
        assert np.linalg.eigvalsh(rho.mat).min() > 0
        flag, cert = is_b_irreducible(rho)
        assert flag
        assert cert["commutant_dim"] == 1
        assert b_decompose(rho).is_leaf

    def test_a_side_of_swapped_state(self):
        flag, _ = is_a_irreducible(swap_sides(_shift_coupled_state()))
        assert flag

    def test_reducible_with_complex_blocks(self, rng):
        first = gen_random(3, 2, 2, seed=11)
        second = gen_random(3, 2, 2, seed=12)
        rho = gen_b_reducible(first, second, weight=0.4)
        phase = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 3)))
        s = nk.random_unitary(3, rng) @ phase
        mapped = apply_local(rho, LocalMap(s, np.eye(4)))
        tree = b_decompose(mapped)
        assert len(tree.leaves()) == 2
        assert np.allclose(tree.reconstruct(), mapped.mat, atol=1e-9)


@seed(3)
@settings(max_examples=10, deadline=None)
@given(stream=st.integers(min_value=0, max_value=10_000))
def test_local_images_of_direct_sums_still_split(stream):
    rng = nk.rng_for(stream)
    first = gen_random(2, 2, 1, seed=stream)
    second = gen_random(2, 2, 2, seed=stream + 1)
    rho = gen_b_reducible(first, second, weight=0.5)
    local_map = LocalMap(nk.random_invertible(2, rng), nk.random_invertible(4, rng))
    mapped = apply_local(rho, local_map)
    flag, cert = is_b_irreducible(mapped)
    assert not flag
    assert cert["parts"] >= 2
    tree = b_decompose(mapped)
    assert np.allclose(tree.reconstruct(), mapped.mat, atol=1e-8 * max(1.0, mapped.norm))
