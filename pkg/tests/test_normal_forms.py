"""
Tests for the classical-classical, Schmidt-rank-three and PPT rank-n forms
"""

import numpy as np
import pytest

from distillkit.analysis.normal_forms import (
    cc_normal_form,
    find_rank_one_element,
    ppt_rank_n_canonical,
    sr3_compression_spot_check,
    sr3_tridiagonal_form,
    sr3_two_by_n_realify,
)
from distillkit.analysis.schmidt import operator_schmidt, schmidt_rank
from distillkit.analysis.witness import is_npt
from distillkit.core import BipartiteState, LocalMap, apply_local, swap_sides
from distillkit.core import numkernel as nk
from distillkit.core.state import embed
from distillkit.errors import (
    ContractViolation,
    NotPPTError,
    SchmidtRankMismatch,
    SingularityError,
)
from distillkit.generators import gen_ppt_rank_n, gen_schmidt_rank


@pytest.fixture(scope="module")
def sr2_state():
    return gen_schmidt_rank(3, 3, 2, seed=4)


@pytest.fixture(scope="module")
def real_sr3_state():
    """Schmidt rank three with real symmetric A-factors, hidden by a random A-side map"""
    e00 = np.diag([1.0, 0.0, 0.0])
    tri = 0.5 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    b2 = np.diag([1.0, -1.0, 0.0])
    b3 = 0.5 * np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    mat = np.kron(np.eye(3), np.eye(3)) + 0.2 * (np.kron(e00, b2) + np.kron(tri, b3))
    rho = BipartiteState(mat, 3, 3, normalize=True)
    s = nk.random_invertible(3, nk.rng_for(17))
    return apply_local(rho, LocalMap(s, np.eye(3)))


class TestCC:

    def test_diagonalizes(self, sr2_state):
        form = cc_normal_form(sr2_state)
        assert form.off_diag_residual < 1e-8
        assert np.all(form.diagonal > -1e-10)
        assert form.local_map.invertible_flags() == (True, True)

    def test_product_terms_reconstruct(self, sr2_state):
        form = cc_normal_form(sr2_state)
        total = sum(t.projector() for t in form.product_terms)
        assert np.allclose(total, sr2_state.mat, atol=1e-9)
        assert all(t.weight > 0 for t in form.product_terms)

    def test_pivot_skips_traceless_factor(self):
        sigma = np.diag([1.0, -1.0, 0.0])
        tau = np.diag([1.0, 0.0, -1.0])
        mat = np.eye(9) / 9 + 0.1 * np.kron(sigma, tau)
        s = nk.random_invertible(3, nk.rng_for(5))
        w = nk.random_invertible(3, nk.rng_for(6))
        rho = apply_local(BipartiteState(mat, 3, 3), LocalMap(s, w))
        form = cc_normal_form(rho)
        weighted = np.abs(operator_schmidt(rho, hermitian=True).coefficients * np.array(form.pivot_traces))
        assert weighted[form.pivot[0]] >= weighted[1 - form.pivot[0]]
        assert weighted[form.pivot[0]] > 1e-6
        assert form.off_diag_residual < 1e-8
        assert form.to_dict()["pivot"] == list(form.pivot)

    def test_wrong_schmidt_rank(self, bell):
        with pytest.raises(SchmidtRankMismatch):
            cc_normal_form(bell)

    def test_singular_reduction(self, sr2_state):
        padded = embed(sr2_state, np.eye(4)[:, :3], np.eye(3))
        with pytest.raises(SingularityError):
            cc_normal_form(padded)

    def test_serializes(self, sr2_state):
        doc = cc_normal_form(sr2_state).to_dict()
        assert doc["form"] == "cc"
        assert doc["product_terms"] > 0


class TestSchmidtRankThree:

    def test_two_by_n_is_ppt(self):
        rho = gen_schmidt_rank(2, 3, 3, seed=6)
        local_map, ppt = sr3_two_by_n_realify(rho)
        assert ppt
        assert not rho.meta["npt"]
        mapped = apply_local(rho, local_map)
        assert np.allclose(mapped.mat, mapped.gamma, atol=1e-8)

    def test_two_by_n_needs_qubit(self, real_sr3_state):
        with pytest.raises(ContractViolation):
            sr3_two_by_n_realify(real_sr3_state)

    def test_tridiagonal_form(self, real_sr3_state):
        assert schmidt_rank(real_sr3_state) == 3
        form = sr3_tridiagonal_form(real_sr3_state)
        assert form is not None
        assert form.rank_one.found
        assert form.ppt
        assert form.gamma_symmetry_residual < 1e-7
        assert np.allclose(form.tridiagonal, np.triu(np.tril(form.tridiagonal, 1), -1))
        assert form.to_dict()["form"] == "sr3"

    def test_wrong_schmidt_rank(self, sr2_state):
        with pytest.raises(SchmidtRankMismatch):
            sr3_tridiagonal_form(sr2_state)

    def test_compression_spot_check(self, real_sr3_state):
        check = sr3_compression_spot_check(real_sr3_state, trials=12, seed=1)
        assert check["trials"] == 12
        assert check["all_ppt"]
        assert check["failures"] == 0
        assert check["worst_min_eig"] > -1e-9


class TestRankOne:

    def test_found(self):
        search = find_rank_one_element([np.eye(2), np.diag([1.0, -1.0])])
        assert search.found
        assert search.achieved < 1e-10
        assert np.linalg.matrix_rank(search.element, tol=1e-8) == 1

    def test_absent(self):
        search = find_rank_one_element([np.eye(3)])
        assert not search.found
        assert search.achieved == pytest.approx(1.0)


class TestPPTRankN:

    def test_product_form(self):
        rho = gen_ppt_rank_n(2, 3, seed=2)
        form = ppt_rank_n_canonical(rho)
        assert len(form.product_terms) == 3
        assert form.reconstruction_residual < 1e-8
        total = sum(t.projector() for t in form.product_terms)
        assert np.allclose(total, rho.mat, atol=1e-8)
        assert form.pivot

    def test_square_case(self):
        rho = gen_ppt_rank_n(3, 3, seed=9)
        form = ppt_rank_n_canonical(rho, seed=1)
        assert len(form.product_terms) == 3
        assert form.commutator_defect < 1e-6

    def test_npt_input(self, bell):
        with pytest.raises(NotPPTError):
            ppt_rank_n_canonical(bell)

    def test_orientation(self):
        rho = swap_sides(gen_ppt_rank_n(2, 3, seed=2))
        assert not is_npt(rho)[0]
        with pytest.raises(ContractViolation):
            ppt_rank_n_canonical(rho)

    def test_rank_mismatch(self, mixed):
        with pytest.raises(ContractViolation):
            ppt_rank_n_canonical(mixed)
