import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from choiceless_lab.universe import (
    EMPTY, FinSet, Kind, Pair, Seq, base, count_kind, decode, encode, enum_kind, kuratowski,
    lower_to_sets, seq_code, seq_decode, sort_key,
)

import oracles

A, B, C = base(0), base(1), base(2)


@pytest.mark.parametrize("kind,k,expected", [
    (Kind.FIN, 5, 32), (Kind.UPAIR, 0, 0), (Kind.ISEQ, 5, 326), (Kind.OPAIR, 5, 25), (Kind.UPAIR, 5, 10),
])
def test_count_examples(kind, k, expected):
    assert count_kind(kind, k) == expected


@pytest.mark.parametrize("kind", [Kind.FIN, Kind.UPAIR, Kind.OPAIR, Kind.ISEQ])
@pytest.mark.parametrize("k", range(7))
def test_count_matches_naive_and_enumeration(kind, k):
    ground = [base(i) for i in range(k)]
    listed = list(enum_kind(kind, ground))
    assert count_kind(kind, k) == oracles.naive_count(kind.value, k) == len(listed) == len(set(listed))


def test_seq_count_needs_maxlen():
    with pytest.raises(ValueError):
        count_kind(Kind.SEQ, 3)
    assert count_kind(Kind.SEQ, 3, maxlen=2) == 1 + 3 + 9


def test_enum_orders():
    assert list(enum_kind(Kind.FIN, [A, B])) == [EMPTY, FinSet([A]), FinSet([B]), FinSet([A, B])]
    assert list(enum_kind(Kind.UPAIR, [A, B, C])) == [FinSet([A, B]), FinSet([A, C]), FinSet([B, C])]
    assert list(enum_kind(Kind.ISEQ, [A, B])) == [Seq(), Seq([A]), Seq([B]), Seq([A, B]), Seq([B, A])]


def test_enum_rejects_repeated_ground():
    with pytest.raises(ValueError):
        list(enum_kind(Kind.FIN, [A, A]))


def test_seq_code_empty_is_zero():
    assert seq_code(()) == 0


def test_seq_code_fixed_enumeration_is_injective():
    ground = [A, B, C]
    for length in range(4):
        seqs = list(itertools.product(ground, repeat=length))
        codes = {seq_code(s, ground) for s in seqs}
        assert len(codes) == 3**length
        for s in seqs:
            assert seq_decode(seq_code(s, ground), ground) == s


def test_seq_code_default_sees_repetition_pattern_only():
    # <a,b> and <b,a> share range and pattern; the default code cannot tell them apart
    assert seq_code((A, B)) == seq_code((B, A))
    assert seq_code((A,)) != seq_code((A, A))


@given(st.lists(st.integers(0, 4), max_size=6))
def test_seq_code_roundtrip_property(digits):
    ground = [base(i) for i in range(5)]
    s = tuple(ground[d] for d in digits)
    assert seq_decode(seq_code(s, ground), ground) == s


def objects():
    atoms = st.integers(0, 5).map(base)
    return st.recursive(
        atoms,
        lambda inner: st.one_of(
            st.frozensets(inner, max_size=3).map(FinSet),
            st.tuples(inner, inner).map(lambda t: Pair(*t)),
            st.lists(inner, max_size=3).map(Seq),
        ),
        max_leaves=8,
    )


@settings(max_examples=200)
@given(objects())
def test_encode_roundtrip(x):
    assert decode(encode(x)) == x


@settings(max_examples=100)
@given(objects(), objects())
def test_sort_key_is_injective(x, y):
    assert (sort_key(x) == sort_key(y)) == (x == y)


def test_pair_lowers_to_kuratowski():
    assert lower_to_sets(Pair(A, B)) == FinSet([FinSet([A]), FinSet([A, B])])
    assert lower_to_sets(Seq([A])) == kuratowski(A, EMPTY)


def flat_objects():
    atoms = st.integers(0, 5).map(base)
    return st.one_of(
        st.frozensets(atoms, max_size=3).map(FinSet),
        st.tuples(atoms, atoms).map(lambda t: Pair(*t)),
        st.lists(atoms, max_size=3).map(Seq),
    )


@settings(max_examples=200)
@given(flat_objects(), flat_objects())
def test_lowering_injective_within_constructor(x, y):
    if type(x) is type(y) and x != y:
        assert lower_to_sets(x) != lower_to_sets(y)


def test_lowering_can_merge_across_constructors():
    # a documented limit: the empty sequence and the empty set lower alike
    assert lower_to_sets(Seq()) == lower_to_sets(EMPTY)


def test_seq_code_with_range_enumeration_separates_same_range():
    ground = [A, B, C]
    seqs = [s for n in range(4) for s in itertools.product(ground, repeat=n)]
    by_range: dict = {}
    for s in seqs:
        rng = sorted(set(s), key=sort_key)
        by_range.setdefault(frozenset(s), {}).setdefault(seq_code(s, rng), []).append(s)
    for codes in by_range.values():
        assert all(len(v) == 1 for v in codes.values())


@pytest.mark.parametrize("kind", [Kind.FIN, Kind.UPAIR, Kind.OPAIR, Kind.ISEQ])
def test_lowering_injective_per_kind(kind):
    for k in range(5):
        objs = list(enum_kind(kind, [base(i) for i in range(k)]))
        assert len({lower_to_sets(x) for x in objs}) == len(objs)
