import itertools
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from jetstress.multiindex import MultiIndex, enumerate_indices, indices_upto, jet_layout, sym_dim


@pytest.mark.parametrize("n,l,expected", [(3, 2, 6), (2, 0, 1), (4, 3, 20), (1, 5, 1)])
def test_sym_dim_examples(n, l, expected):
    assert sym_dim(n, l) == expected
    assert len(enumerate_indices(n, l)) == expected


def test_enumeration_matches_sorted_sequences():
    for n in range(1, 5):
        for l in range(0, 5):
            seqs = {tuple(sorted(s)) for s in itertools.product(range(1, n + 1), repeat=l)}
            got = [I.sequence() for I in enumerate_indices(n, l)]
            assert sorted(got) == sorted(seqs)
            assert len(set(got)) == len(got)


def test_from_sequence_is_order_free():
    a = MultiIndex.from_sequence([2, 1, 2], 3)
    b = MultiIndex.from_sequence([2, 2, 1], 3)
    assert a == b
    assert a.counts == (1, 2, 0)
    assert a.sequence() == (1, 2, 2)
    assert a.degree == 3
    assert a.factorial == 2
    assert a.multiplicity == 3
    assert a.distinct_count == 2


def test_bad_base_index_rejected():
    with pytest.raises(IndexError):
        MultiIndex.from_sequence([0], 2)
    with pytest.raises(IndexError):
        MultiIndex.from_sequence([3], 2)
    with pytest.raises(ValueError):
        MultiIndex.from_sequence([1], 2).remove(2)


@given(st.integers(1, 4), st.lists(st.integers(1, 4), max_size=5), st.integers(1, 4))
def test_append_remove_roundtrip(n, seq, j):
    seq = [min(s, n) for s in seq]
    j = min(j, n)
    I = MultiIndex.from_sequence(seq, n)
    assert I.append(j).remove(j) == I
    assert I.append(j).degree == I.degree + 1


@given(st.integers(1, 4), st.integers(0, 5))
def test_multiplicities_sum_to_power(n, l):
    # number of ordered sequences of length l equals n**l
    assert sum(I.multiplicity for I in enumerate_indices(n, l)) == n**l


def test_layout_is_graded_and_append_table():
    lay = jet_layout(2, 3)
    assert lay.size == comb(2 + 3, 3)
    assert [I.degree for I in lay.indices] == sorted(I.degree for I in lay.indices)
    assert lay.indices == tuple(indices_upto(2, 3))
    for p, I in enumerate(lay.indices):
        for r in range(2):
            if I.degree < 3:
                assert lay.indices[lay.append[p, r]] == I.append(r + 1)
            else:
                assert lay.append[p, r] == -1
    assert lay.factorials[lay.pos(MultiIndex.from_sequence([1, 1, 2], 2))] == factorial(2)
