import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jetstress.multiindex import MultiIndex, enumerate_indices, sym_dim
from jetstress.symalg import (
    AlmostSymArray,
    Convention,
    ConventionError,
    SymArray,
    collapse_last,
    pair,
    spread_last,
    symmetrize,
    symmetrize_almost,
)


def dense_symmetrize(A):
    perms = list(itertools.permutations(range(A.ndim)))
    return sum(np.transpose(A, p) for p in perms) / len(perms)


@pytest.mark.parametrize("n,l", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_symmetrize_matches_dense_average(rng, n, l):
    A = rng.normal(size=(n,) * l)
    S = symmetrize(A)
    assert np.allclose(S.to_dense(), dense_symmetrize(A), atol=1e-14)
    assert S.convention == Convention.DERIVATIVE


def test_symmetrize_callable():
    S = symmetrize(lambda seq: float(seq[0] == 1 and seq[1] == 2), 2, 2)
    assert S[MultiIndex.from_sequence([1, 2], 2)] == pytest.approx(0.5)
    assert S[MultiIndex.from_sequence([1, 1], 2)] == 0.0


@pytest.mark.parametrize("n,l", [(2, 2), (3, 2), (2, 3), (3, 3), (2, 4)])
def test_symmetrize_almost_uses_l_moves(rng, n, l):
    # array symmetric in the first l-1 slots
    raw = rng.normal(size=(n,) * l)
    partial = sum(np.transpose(raw, p + (l - 1,)) for p in itertools.permutations(range(l - 1)))
    T = AlmostSymArray(n, l, np.array([[partial[J.offsets() + (j,)] for j in range(n)] for J in enumerate_indices(n, l - 1)]), Convention.DERIVATIVE)
    assert np.allclose(T.to_dense(), partial)
    assert np.allclose(symmetrize_almost(T).to_dense(), dense_symmetrize(partial), atol=1e-13)


def test_collapse_examples():
    # n = 2, l = 2: (collapse T)_{12} = T^{1;2} + T^{2;1}
    T = AlmostSymArray.from_mapping(
        2, 2, {(MultiIndex.from_sequence([1], 2), 2): 3.0, (MultiIndex.from_sequence([2], 2), 1): 5.0}
    )
    R = collapse_last(T)
    assert R[MultiIndex.from_sequence([1, 2], 2)] == 8.0
    assert R[MultiIndex.from_sequence([1, 1], 2)] == 0.0


def test_collapse_of_orbit_constant_array_counts_distinct(rng):
    n, l = 3, 3
    R = SymArray(n, l, rng.normal(size=sym_dim(n, l)))
    vals = np.array([[R[J.append(j)] for j in range(1, n + 1)] for J in enumerate_indices(n, l - 1)])
    C = collapse_last(AlmostSymArray(n, l, vals))
    for I in enumerate_indices(n, l):
        assert C[I] == pytest.approx(I.distinct_count * R[I])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_spread_is_right_inverse_and_transfers_pairing(n, l, seed):
    rng = np.random.default_rng(seed)
    R = SymArray(n, l, rng.normal(size=sym_dim(n, l)))
    assert np.allclose(collapse_last(spread_last(R)).values, R.values, atol=1e-13)
    T = AlmostSymArray(n, l, rng.normal(size=(sym_dim(n, l - 1), n)))
    w = SymArray(n, l, rng.normal(size=sym_dim(n, l)), Convention.DERIVATIVE)
    direct = sum(T.values[q, j - 1] * w[J.append(j)] for q, J in enumerate(T.heads) for j in range(1, n + 1))
    assert pair(collapse_last(T), w) == pytest.approx(direct, abs=1e-12)


def test_pair_is_full_contraction(rng):
    # dual components sum over orderings, so pairing equals the dense contraction
    n, l = 3, 3
    A = rng.normal(size=(n,) * l)
    A = dense_symmetrize(A)
    B = dense_symmetrize(rng.normal(size=(n,) * l))
    S = SymArray.from_dense(A, Convention.DUAL)
    w = SymArray.from_dense(B, Convention.DERIVATIVE)
    assert pair(S, w) == pytest.approx(np.sum(A * B), abs=1e-12)


def test_convention_mixing_raises(rng):
    a = SymArray(2, 2, rng.normal(size=3), Convention.DUAL)
    b = SymArray(2, 2, rng.normal(size=3), Convention.DERIVATIVE)
    with pytest.raises(ConventionError):
        a + b
    with pytest.raises(ConventionError):
        pair(b, a)


def test_json_roundtrip(rng):
    T = AlmostSymArray(2, 3, rng.normal(size=(3, 2)))
    back = AlmostSymArray.from_json(T.to_json())
    assert np.array_equal(back.values, T.values)
    S = SymArray(3, 2, rng.normal(size=6), Convention.DERIVATIVE)
    assert np.array_equal(SymArray.from_json(S.to_json()).values, S.values)


def test_symmetry_defect_detects_slot_asymmetry():
    T = AlmostSymArray.from_mapping(2, 2, {(MultiIndex.from_sequence([1], 2), 2): 1.0}, Convention.DERIVATIVE)
    assert T.symmetry_defect() == pytest.approx(0.5)
