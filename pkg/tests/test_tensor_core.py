import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symortho import (
    Decomposition,
    FieldError,
    RankOneTerm,
    ShapeError,
    assemble,
    contract_mode,
    frobenius_norm,
    inner,
    is_symmetric,
    outer,
    random_symmetric,
    random_tensor,
    random_unit,
    symmetrize,
    tensor_from_json,
    tensor_to_json,
)
from symortho.tensor import DenseTensor, contract_all_but_one


def test_dense_tensor_basic_properties():
    t = DenseTensor(np.zeros((2, 3, 4)))
    assert t.dims == (2, 3, 4)
    assert t.order == 3
    assert not t.is_cubical
    assert DenseTensor(np.zeros((3, 3, 3))).is_cubical


def test_outer_matches_manual_product():
    a = np.array([1.0, 2.0])
    b = np.array([3.0, 4.0, 5.0])
    got = outer([a, b]).data
    assert np.allclose(got, np.outer(a, b))


def test_contract_mode_is_one_based():
    rng = np.random.default_rng(0)
    t = random_tensor((2, 3, 4), rng)
    v = random_unit(3, rng)
    got = contract_mode(t, 2, v)
    want = np.einsum("ijk,j->ik", t.data, v)
    assert got.dims == (2, 4)
    assert np.allclose(got.data, want)


def test_contract_mode_rejects_bad_mode_and_length():
    t = random_tensor((2, 3), np.random.default_rng(0))
    with pytest.raises(ShapeError):
        contract_mode(t, 0, np.ones(2))
    with pytest.raises(ShapeError):
        contract_mode(t, 3, np.ones(2))
    with pytest.raises(ShapeError):
        contract_mode(t, 1, np.ones(5))


def test_contract_to_scalar():
    t = random_tensor((2, 2), np.random.default_rng(1))
    u = random_unit(2, np.random.default_rng(2))
    v = random_unit(2, np.random.default_rng(3))
    s = contract_mode(contract_mode(t, 2, v), 1, u)
    assert np.isscalar(s) or np.ndim(s) == 0
    assert np.isclose(float(s), float(u @ t.data @ v))


def test_contract_all_but_one():
    rng = np.random.default_rng(4)
    t = random_tensor((3, 3, 3), rng)
    vecs = [random_unit(3, rng) for _ in range(3)]
    got = contract_all_but_one(t, 2, vecs)
    want = np.einsum("ijk,i,k->j", t.data, vecs[0], vecs[2])
    assert np.allclose(got, want)


def test_inner_is_frobenius_inner_product():
    rng = np.random.default_rng(5)
    s = random_tensor((2, 3), rng)
    t = random_tensor((2, 3), rng)
    assert np.isclose(inner(s, t), float(np.sum(s.data * t.data)))


def test_symmetrize_fixes_symmetric_input():
    rng = np.random.default_rng(6)
    t = random_symmetric(3, 3, rng)
    assert is_symmetric(t)
    again = symmetrize(t)
    assert np.allclose(again.data, t.data)


def test_symmetrize_output_is_symmetric():
    rng = np.random.default_rng(7)
    t = random_tensor((3, 3, 3), rng)
    s = symmetrize(t)
    assert is_symmetric(s)
    assert not is_symmetric(t)


def test_random_symmetric_is_unit_norm_and_symmetric():
    rng = np.random.default_rng(8)
    t = random_symmetric(2, 4, rng)
    assert is_symmetric(t)
    assert np.isclose(frobenius_norm(t), 1.0)


def test_rank_one_term_to_tensor():
    term = RankOneTerm(2.0, (np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    assert np.allclose(term.to_tensor().data, [[0.0, 2.0], [0.0, 0.0]])


def test_canonical_moves_phase_into_sigma():
    term = RankOneTerm(3.0, (np.array([-1.0, 0.0]), np.array([0.0, -1.0])))
    canon = term.canonical()
    # two sign flips cancel
    assert np.isclose(canon.sigma, 3.0)
    assert canon.factors[0][0] > 0
    assert canon.factors[1][1] > 0
    assert np.allclose(term.to_tensor().data, canon.to_tensor().data)


def test_assemble_sums_terms():
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    dec = Decomposition(
        terms=(RankOneTerm(1.0, (e1, e1)), RankOneTerm(-2.0, (e2, e2))),
    )
    got = assemble(dec)
    assert np.allclose(got.data, [[1.0, 0.0], [0.0, -2.0]])


def test_decomposition_rank_and_sigmas():
    e1 = np.array([1.0, 0.0])
    dec = Decomposition(terms=(RankOneTerm(1.5, (e1, e1)),))
    assert dec.rank == 1
    assert np.allclose(dec.sigmas(), [1.5])


def test_json_round_trip_real():
    rng = np.random.default_rng(9)
    t = random_tensor((2, 3, 2), rng)
    back = tensor_from_json(tensor_to_json(t))
    assert back.dims == t.dims
    assert np.allclose(back.data, t.data)


def test_json_round_trip_complex():
    arr = np.array([[1 + 2j, 0], [0, 1 - 1j]])
    back = tensor_from_json(tensor_to_json(DenseTensor.from_array(arr)))
    assert np.allclose(back.data, arr)


def test_json_rejects_malformed_payloads():
    good = json.loads(tensor_to_json(random_tensor((2, 2), np.random.default_rng(0))))

    with pytest.raises(ShapeError, match="malformed"):
        tensor_from_json("{not json")
    for broken in (
        {k: v for k, v in good.items() if k != "dims"},
        {**good, "data": good["data"][:-1]},
        {**good, "dims": [2, 0]},
        {**good, "dims": "nope"},
    ):
        with pytest.raises(ShapeError, match="malformed"):
            tensor_from_json(json.dumps(broken))
    with pytest.raises(FieldError):
        tensor_from_json(json.dumps({**good, "field": "quaternion"}))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(2, 3), st.integers(0, 10_000))
def test_contraction_linearity(n, d, seed):
    """T x_j (au + bv) = a(T x_j u) + b(T x_j v)."""
    rng = np.random.default_rng(seed)
    t = random_tensor((n,) * d, rng)
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    a, b = rng.standard_normal(2)
    lhs = contract_mode(t, 1, a * u + b * v).data
    rhs = a * contract_mode(t, 1, u).data + b * contract_mode(t, 1, v).data
    assert np.allclose(lhs, rhs)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_symmetric_contraction_mode_free(seed):
    # contracting a symmetric tensor is the same in every mode
    rng = np.random.default_rng(seed)
    t = random_symmetric(3, 3, rng)
    v = random_unit(3, rng)
    slices = [contract_mode(t, j, v).data for j in (1, 2, 3)]
    assert np.allclose(slices[0], slices[1])
    assert np.allclose(slices[1], slices[2])
