"""
Tests for the numerical kernel
"""

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from distillkit.core import numkernel as nk
from distillkit.errors import ContractViolation, SingularityError
from distillkit.models.settings import TolerancePolicy

from .conftest import random_hermitian, random_psd


@seed(1)
@settings(max_examples=25, deadline=None)
@given(d=st.integers(min_value=1, max_value=6), stream=st.integers(min_value=0, max_value=10_000))
def test_hermitian_eig_reconstructs(d, stream):
    rng = nk.rng_for(7, stream)
    m = random_hermitian(rng, d)
    values, vectors = nk.hermitian_eig(m)
    assert np.all(np.diff(values) >= 0)
    assert np.allclose(vectors @ np.diag(values) @ vectors.conj().T, m, atol=1e-10)
    assert np.allclose(vectors.conj().T @ vectors, np.eye(d), atol=1e-10)


def test_eigenvectors_have_real_positive_leading_component(rng):
    _, vectors = nk.hermitian_eig(random_hermitian(rng, 5))
    for k in range(5):
        col = vectors[:, k]
        lead = col[np.argmax(np.abs(col) > 1e-9 * np.abs(col).max())]
        assert abs(lead.imag) < 1e-12
        assert lead.real > 0


def test_degenerate_eigenspace_basis_is_canonical(rng):
    u = nk.random_unitary(4, rng)
    m = u @ np.diag([1.0, 1.0, 1.0, 2.0]) @ u.conj().T
    w = nk.random_unitary(3, nk.rng_for(99))
    rotated = u.copy()
    rotated[:, :3] = u[:, :3] @ w
    m2 = rotated @ np.diag([1.0, 1.0, 1.0, 2.0]) @ rotated.conj().T
    _, v1 = nk.hermitian_eig(m)
    _, v2 = nk.hermitian_eig(m2)
    assert np.allclose(v1, v2, atol=1e-8)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ContractViolation):
        nk.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_svd_reconstructs_and_orders(rng):
    m = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    u, s, v = nk.svd(m)
    assert np.all(np.diff(s) <= 0)
    assert np.allclose((u * s[None, :]) @ v.conj().T, m, atol=1e-10)


def test_numeric_rank_and_margin(rng):
    m = random_psd(rng, 6, 3)
    assert nk.numeric_rank(m) == 3
    assert nk.numeric_rank(np.zeros((3, 3))) == 0
    s = np.linalg.svd(m, compute_uv=False)
    kept, nxt = nk.rank_margin(s, 3)
    assert kept > 1e-6
    assert nxt < 1e-12


def test_rank_respects_policy():
    m = np.diag([1.0, 1e-6])
    assert nk.numeric_rank(m, TolerancePolicy(rank_rtol=1e-8)) == 2
    assert nk.numeric_rank(m, TolerancePolicy(rank_rtol=1e-4)) == 1


def test_det_matches_numpy(rng):
    m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert np.isclose(nk.det(m), np.linalg.det(m))
    assert nk.det(np.zeros((0, 0))) == 1.0


def test_hermitian_det_is_real(rng):
    m = random_hermitian(rng, 4)
    assert np.isclose(nk.hermitian_det(m), np.linalg.det(m).real)


def test_inverse_sqrt(rng):
    m = random_psd(rng, 4, 4)
    p = nk.inverse_sqrt(m)
    assert np.allclose(p @ m @ p, np.eye(4), atol=1e-8)
    with pytest.raises(SingularityError):
        nk.inverse_sqrt(random_psd(rng, 4, 2))


def test_sqrt_psd(rng):
    m = random_psd(rng, 4, 2)
    r = nk.sqrt_psd(m)
    assert np.allclose(r @ r, m, atol=1e-10)


def test_solve_and_singular(rng):
    a = rng.standard_normal((3, 3))
    b = rng.standard_normal(3)
    assert np.allclose(a @ nk.solve(a, b), b)
    with pytest.raises(SingularityError):
        nk.solve(np.ones((3, 3)), b)


def test_range_and_null_basis_are_complementary(rng):
    m = rng.standard_normal((5, 2)) @ rng.standard_normal((2, 5))
    r = nk.range_basis(m)
    n = nk.null_basis(m)
    assert r.shape[1] == 2
    assert n.shape[1] == 3
    assert np.allclose(m @ n, 0, atol=1e-10)


def test_rng_for_is_deterministic():
    a = nk.rng_for(5, 1, 2).standard_normal(4)
    b = nk.rng_for(5, 1, 2).standard_normal(4)
    c = nk.rng_for(5, 1, 3).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_random_unitary_and_invertible(rng):
    u = nk.random_unitary(4, rng)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-10)
    assert nk.is_invertible(nk.random_invertible(3, rng))


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ContractViolation):
        nk.as_matrix(np.zeros(3))
    with pytest.raises(ContractViolation):
        nk.as_matrix([[np.nan]])


def test_normalized_zero_vector():
    with pytest.raises(ContractViolation):
        nk.normalized(np.zeros(3))


def test_tolerance_policy_validation():
    with pytest.raises(ValueError):
        TolerancePolicy(rank_rtol=0.0)
