import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from diffpi.exactla import (
    axpy,
    DimensionError,
    EchelonAccumulator,
    InconsistentBasisError,
    RankAccumulator,
    SpanCoordinates,
    SparseVec,
    format_scalar,
    kernel_contains,
    nullspace,
    permutation_trace,
    rank_of,
    scalar,
    trace_on_quotient,
)

small = st.integers(min_value=-3, max_value=3)


def matrices(rows=6, cols=6):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=1, max_size=rows)


def as_vec(row):
    return {j: scalar(x) for j, x in enumerate(row) if x}


def test_scalar_parsing():
    assert scalar("3/6") == scalar(1) / 2
    assert format_scalar(scalar("-4/2")) == "-2"
    assert format_scalar(scalar("1/3")) == "1/3"


def test_sparse_vec_arithmetic():
    a = SparseVec.from_dense([1, 0, 2])
    b = SparseVec.from_dense([1, 1, 2])
    assert (b - a).to_dense() == [0, 1, 0]
    assert not (a - a)
    assert (a * 3).to_dense() == [3, 0, 6]
    assert a.leading_index == 0
    with pytest.raises(DimensionError):
        a + SparseVec.from_dense([1, 2])


def test_rank_of_dependent_rows():
    rows = [{0: 1, 1: 2}, {0: 2, 1: 4}, {2: 1}]
    assert rank_of(rows, 3) == 2
    assert kernel_contains([SparseVec(3, r) for r in rows], SparseVec(3, {0: 3, 1: 6, 2: 5}))


def test_nullspace_of_single_equation():
    basis = nullspace([{0: 1, 1: 1}], 3)
    assert len(basis) == 2
    for v in basis:
        assert v.get(0, 0) + v.get(1, 0) == 0


@given(matrices())
def test_rank_is_insertion_order_independent(m):
    rows = [as_vec(r) for r in m]
    shuffled = rows[:]
    random.Random(len(rows)).shuffle(shuffled)
    assert rank_of(rows, 6) == rank_of(shuffled, 6)
    assert rank_of(rows, 6) <= min(len(rows), 6)


@given(matrices())
def test_reduced_rows_reduce_their_span(m):
    acc = RankAccumulator(6)
    for r in m:
        acc.insert(as_vec(r))
    for r in m:
        assert acc.contains(as_vec(r))
        assert not acc.reduce(as_vec(r))
    for p, row in acc.rows():
        assert row[p] == 1
        for q in acc.pivots:
            if q != p:
                assert q not in row


@given(matrices(8, 7))
def test_forward_echelon_matches_reduced(m):
    ech = EchelonAccumulator(7)
    full = RankAccumulator(7)
    for r in m:
        assert ech.insert(as_vec(r)) == full.insert(as_vec(r))
    red = ech.to_reduced()
    assert red.rank == full.rank
    assert sorted(red.pivots) == sorted(full.pivots)
    for p, row in full.rows():
        assert red.row(p) == row


@given(matrices(5, 5))
def test_nullspace_is_annihilated(m):
    eqs = [as_vec(r) for r in m]
    basis = nullspace(eqs, 5)
    assert len(basis) + rank_of(eqs, 5) == 5
    for v in basis:
        for e in eqs:
            assert sum(x * v.get(j, 0) for j, x in e.items()) == 0


def test_coordinates_on_span():
    coords = SpanCoordinates([{0: 1, 1: 1}, {1: 1}], 2)
    assert coords.coordinates({0: 2, 1: 5}) == [2, 3]
    acc = RankAccumulator(3)
    acc.insert({0: 1, 1: 1})
    assert acc.coordinates({0: 3, 1: 3}) == {0: 3}
    assert SpanCoordinates([{0: 1}], 2).coordinates({1: 1}) is None


def test_permutation_trace_of_swap():
    # span of e0+e1 and e2 under the swap 0<->1: fixes both, trace 2
    acc = RankAccumulator(3)
    acc.insert({0: 1, 1: 1})
    acc.insert({2: 1})
    swap = {0: 1, 1: 0, 2: 2}
    assert permutation_trace(acc, lambda p: swap[p]) == 2
    # on the whole space the trace counts fixed points
    whole = RankAccumulator(3)
    for i in range(3):
        whole.insert({i: 1})
    assert permutation_trace(whole, lambda p: swap[p]) == 1


def test_trace_on_quotient_of_swap():
    # F^2 / span(e0+e1) under the swap: the class of e0 goes to the class of e1 = -e0
    def action(v):
        return {1 - j: x for j, x in v}

    assert trace_on_quotient([{0: 1, 1: 1}], action, [1], 2) == -1
    assert trace_on_quotient([{0: 1, 1: -1}], action, [1], 2) == 1
    with pytest.raises(InconsistentBasisError):
        trace_on_quotient([{0: 1, 1: 1}], action, [0, 1], 2)


def test_axpy_never_stores_zeros():
    y = {}
    axpy(y, scalar(0), {0: scalar(1)})
    axpy(y, scalar(1), {1: scalar(0), 2: scalar(2)})
    axpy(y, scalar(-1), {2: scalar(2)})
    assert y == {}
