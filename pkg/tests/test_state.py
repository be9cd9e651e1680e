"""
Tests for BipartiteState, block factors, local maps and the qsf-1 codec
"""

import json

import numpy as np
import pytest

from distillkit.core import (
    BipartiteState,
    LocalMap,
    apply_local,
    dump_state,
    kernel_basis,
    load_state,
    maximally_mixed,
    partial_transpose,
    product_state,
    read_state_file,
    restrict_to_support,
    swap_sides,
    write_state_file,
)
from distillkit.core import numkernel as nk
from distillkit.core.state import embed
from distillkit.errors import ContractViolation, FormatError, PSDViolationError, SingularityError

from .conftest import random_psd


class TestValidation:

    def test_shape_mismatch(self):
        with pytest.raises(FormatError):
            BipartiteState(np.eye(5), 2, 2)

    def test_nonpositive_dims(self):
        with pytest.raises(FormatError):
            BipartiteState(np.eye(1), 0, 1)

    def test_negative_eigenvalue(self):
        with pytest.raises(PSDViolationError):
            BipartiteState(np.diag([1.0, -1.0, 1.0, 1.0]), 2, 2)

    def test_not_hermitian(self):
        m = np.eye(4, dtype=complex)
        m[0, 1] = 1.0
        with pytest.raises(PSDViolationError):
            BipartiteState(m, 2, 2)

    def test_zero_matrix(self):
        with pytest.raises(PSDViolationError):
            BipartiteState(np.zeros((4, 4)), 2, 2)

    def test_matrix_is_read_only(self, bell):
        with pytest.raises(ValueError):
            bell.mat[0, 0] = 2.0

    def test_normalize(self):
        rho = BipartiteState(3 * np.eye(4), 2, 2, normalize=True)
        assert rho.trace == pytest.approx(1.0)


def test_bell_partial_transpose(bell):
    values = np.linalg.eigvalsh(bell.gamma)
    assert values[0] == pytest.approx(-0.5)
    assert np.allclose(sorted(values), [-0.5, 0.5, 0.5, 0.5])


def test_partial_transpose_on_raw_operator(bell):
    assert np.allclose(partial_transpose(bell.mat, (2, 2)), bell.gamma)
    with pytest.raises(ContractViolation):
        partial_transpose(bell.mat)


def test_reductions(bell, product):
    assert np.allclose(bell.reduced_a, np.eye(2) / 2)
    assert np.allclose(bell.reduced_b, np.eye(2) / 2)
    assert np.allclose(product.reduced_a, np.diag([0.7, 0.3]))
    assert bell.local_ranks == (2, 2)


def test_block_factor_reconstructs(rng):
    rho = BipartiteState(random_psd(rng, 9, 4), 3, 3)
    factor = rho.block_factor
    assert factor.rank == 4
    assert len(factor.blocks) == 3
    assert all(b.shape == (4, 3) for b in factor.blocks)
    assert np.allclose(factor.reconstruct(), rho.mat, atol=1e-12)
    assert np.allclose(factor.gram(), rho.reduced_a, atol=1e-12)


def test_block_accessor(rng):
    rho = BipartiteState(random_psd(rng, 6, 3), 2, 3)
    assert np.allclose(rho.block(1, 0), rho.mat[3:6, 0:3])


def test_rank_plus_kernel_dimension(rng):
    for rank in (1, 3, 6, 9):
        rho = BipartiteState(random_psd(rng, 9, rank), 3, 3)
        assert rho.rank + kernel_basis(rho).shape[1] == 9
        assert np.allclose(rho.mat @ kernel_basis(rho), 0, atol=1e-10)


def test_apply_local_rejects_singular(bell):
    singular = LocalMap(np.diag([1.0, 0.0]), np.eye(2))
    with pytest.raises(SingularityError):
        apply_local(bell, singular)


def test_apply_local_preserves_npt(bell, rng):
    local_map = LocalMap(nk.random_invertible(2, rng), nk.random_invertible(2, rng))
    mapped = apply_local(bell, local_map)
    assert mapped.trace == pytest.approx(1.0)
    assert np.linalg.eigvalsh(mapped.gamma)[0] < 0


def test_local_map_inverse_and_compose(rng):
    f = LocalMap(nk.random_invertible(3, rng), nk.random_invertible(2, rng))
    g = f.compose(f.inverse())
    assert np.allclose(g.s, np.eye(3), atol=1e-9)
    assert np.allclose(g.w, np.eye(2), atol=1e-9)


def test_swap_sides_is_an_involution(rng):
    rho = BipartiteState(random_psd(rng, 6, 2), 2, 3)
    swapped = swap_sides(rho)
    assert swapped.dims == (3, 2)
    assert np.allclose(swapped.reduced_a, rho.reduced_b)
    assert np.allclose(swap_sides(swapped).mat, rho.mat)


def test_restrict_and_embed():
    rho = product_state(np.diag([0.5, 0.5, 0.0]), np.diag([0.2, 0.0, 0.8]))
    support, ua, ub = restrict_to_support(rho)
    assert support.dims == (2, 2)
    assert np.allclose(embed(support, ua, ub).mat, rho.mat, atol=1e-12)


def test_maximally_mixed():
    rho = maximally_mixed(2, 3)
    assert rho.rank == 6
    assert rho.trace == pytest.approx(1.0)


class TestQSF:

    def test_round_trip_is_bit_exact(self, rng):
        rho = BipartiteState(random_psd(rng, 6, 3), 2, 3, meta={"family": "test"})
        back = load_state(dump_state(rho))
        assert np.array_equal(back.mat, rho.mat)
        assert back.meta == {"family": "test"}

    def test_factor_round_trip(self, rng):
        rho = BipartiteState(random_psd(rng, 4, 2), 2, 2)
        rho = BipartiteState(rho.mat, 2, 2, factor=rho.block_factor)
        back = load_state(dump_state(rho, include_factor=True))
        assert back.factor is not None
        assert np.allclose(back.factor.reconstruct(), back.mat)

    def test_document_layout(self, bell):
        doc = json.loads(dump_state(bell))
        assert doc["format"] == "qsf-1"
        assert (doc["dimA"], doc["dimB"]) == (2, 2)
        assert len(doc["matrix"]) == 16
        assert doc["matrix"][3] == pytest.approx([0.5, 0.0])
        assert doc["matrix"][1] == [0.0, 0.0]

    def test_file_round_trip(self, bell, tmp_path):
        path = write_state_file(bell, tmp_path / "nested" / "bell.qsf.json")
        assert np.array_equal(read_state_file(path).mat, bell.mat)

    @pytest.mark.parametrize("payload", [
        "not json",
        "[1, 2]",
        '{"format": "qsf-1", "dimA": 2}',
        '{"format": "qsf-2", "dimA": 1, "dimB": 1, "matrix": [[1.0, 0.0]]}',
        '{"format": "qsf-1", "dimA": 1, "dimB": 2, "matrix": [[1.0, 0.0]]}',
        '{"format": "qsf-1", "dimA": 1, "dimB": 1, "matrix": [[1.0]]}',
    ])
    def test_malformed_documents(self, payload):
        with pytest.raises(FormatError):
            load_state(payload)

    @pytest.mark.parametrize("blocks", [
        [[[[1.0, 0.0]]]] * 2,
        [[[[1.0, 0.0], [0.0, 0.0]]]] * 2,
        [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0]]]] * 2,
    ])
    def test_factor_block_shapes(self, bell, blocks):
        doc = json.loads(dump_state(bell))
        doc["factor"] = {"R": 2, "blocks": blocks}
        with pytest.raises(FormatError, match="factor"):
            load_state(json.dumps(doc))

    def test_negative_matrix(self):
        payload = json.dumps({"format": "qsf-1", "dimA": 1, "dimB": 1, "matrix": [[-1.0, 0.0]]})
        with pytest.raises(PSDViolationError):
            load_state(payload)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            read_state_file(tmp_path / "absent.qsf.json")

    def test_normalize_on_load(self):
        payload = json.dumps({"format": "qsf-1", "dimA": 1, "dimB": 2,
                              "matrix": [[2.0, 0.0], [0.0, 0.0], [0.0, 0.0], [2.0, 0.0]]})
        assert load_state(payload, normalize=True).trace == pytest.approx(1.0)
