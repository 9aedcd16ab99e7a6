import itertools
import random
from fractions import Fraction

import pytest

from choiceless_lab.classic import (
    RNPerm, TableGapError, counting_templates, rc_delta, rc_f1, rc_f2, rc_f3, rc_f3_code, rc_f3_decode,
    rc_group_element, rn_act, rn_atom, rn_build, rn_compose, rn_keys, rn_perm_from_permutation, rn_size,
    rn_to_permutation, rz_inject, rz_points,
)
from choiceless_lab.symmetry import act, order_relabelings, rc_atom, rc_triple
from choiceless_lab.universe import EMPTY, FinSet, Kind, Pair, ResourceLimit, Seq, base, enum_kind

import oracles

a0, b0, c0 = rc_triple(0)
a1, b1, c1 = rc_triple(1)
RC3 = [a for n in range(3) for a in rc_triple(n)]
RC4 = [a for n in range(4) for a in rc_triple(n)]


# -- rn -----------------------------------------------------------------------


def test_rn_build_examples():
    assert rn_build(2, 0) == [base(0), base(1)]
    u = rn_build(1, 1)
    assert len(u) == 5
    assert set(u) == {base(0)} | {rn_atom(1, p, e) for p in [(), (base(0),)] for e in (0, 1)}


@pytest.mark.parametrize("depth", [0, 1, 2])
def test_rn_sizes_match_naive_tower(depth):
    built = rn_build(2, depth)
    assert len(built) == len(set(built)) == rn_size(2, depth) == oracles.rn_naive_size(2, depth)


def test_rn_recurrence():
    for n in range(2):
        prev = rn_size(2, n)
        assert rn_size(2, n + 1) == prev + 2 * sum(prev**k for k in range(n + 2))


def test_rn_build_cap():
    with pytest.raises(ResourceLimit) as info:
        rn_build(3, 2, cap=100)
    assert info.value.size == rn_size(3, 2)


def test_rn_act_examples():
    universe = rn_build(2, 1)
    ident = RNPerm()
    assert all(rn_act(ident, x) == x for x in universe)
    flip = RNPerm({}, {(1, (base(0),))})
    assert rn_act(flip, rn_atom(1, (base(0),), 0)) == rn_atom(1, (base(0),), 1)
    assert rn_act(flip, rn_atom(1, (base(1),), 0)) == rn_atom(1, (base(1),), 0)


def random_rn_perm(rng, universe):
    bases = [a for a in universe if a.tag == "base"]
    img = bases[:]
    rng.shuffle(img)
    flips = {k for k in sorted(rn_keys(universe), key=repr) if rng.random() < 0.5}
    return RNPerm(dict(zip(bases, img)), flips)


def test_rn_composition_law():
    universe = rn_build(2, 1)
    rng = random.Random(11)
    for _ in range(50):
        s, r = random_rn_perm(rng, universe), random_rn_perm(rng, universe)
        sr = rn_compose(s, r, universe)
        for x in universe:
            assert rn_act(sr, x) == rn_act(s, rn_act(r, x))


def test_rn_permutation_roundtrip():
    universe = rn_build(2, 1)
    rng = random.Random(5)
    for _ in range(20):
        s = random_rn_perm(rng, universe)
        pi = rn_to_permutation(s, universe)
        back = rn_perm_from_permutation(pi, universe)
        assert back is not None and all(rn_act(back, x) == pi(x) for x in universe)


def test_counting_templates_against_oracle():
    t = counting_templates(3)
    assert t["iseq_over_square"] == oracles.iseq_template(3) == 5
    assert t["fin_over_upair"] == oracles.fin_template(3)


# -- rc -----------------------------------------------------------------------


def test_rc_delta():
    assert rc_delta(a0, b0) == 1
    assert rc_delta(a0, c0) == 2
    for x, y in [(a0, a0), (a0, a1)]:
        with pytest.raises(ValueError):
            rc_delta(x, y)


def test_rc_f1_examples():
    assert rc_f1(FinSet([a0, b1])) == Pair(a0, b1)
    assert rc_f1(FinSet([a0, b0])) == Pair(c0, c0)


def test_rc_f2_examples():
    assert rc_f2(Pair(a0, a0)) == Seq([a0])
    assert rc_f2(Pair(a0, b0)) == Seq([a0, b0])


def test_rc_f1_injective_on_four_triples():
    table = {s: rc_f1(s) for s in enum_kind(Kind.UPAIR, RC4)}
    assert len(table) == 66 and not oracles.collisions(table)


def test_rc_f2_injective_on_three_triples():
    table = {p: rc_f2(p) for p in enum_kind(Kind.OPAIR, RC3)}
    assert len(table) == 81 and not oracles.collisions(table)


def test_rc_f3_anchors():
    assert rc_f3(Seq()) == EMPTY
    for seq, image in oracles.RC_F3_ANCHORS.items():
        s = Seq(rc_atom(n, pos) for n, pos in seq)
        assert rc_f3(s) == FinSet(rc_atom(n, pos) for n, pos in image)
    assert rc_f3_code(Seq([a0, c0])) == 18


def test_rc_f3_rejects_repetition():
    with pytest.raises(ValueError):
        rc_f3(Seq([a0, a0]))


def test_rc_f3_unique_full_triple_and_roundtrip():
    for s in enum_kind(Kind.ISEQ, RC3, 3):
        F = rc_f3(s)
        if not len(s):
            continue
        full = [n for n in {a.payload[0] for a in F} if set(rc_triple(n)) <= set(F)]
        q = rc_f3_code(s)
        assert full == [q]
        assert q > max(a.payload[0] for a in s)
        assert rc_f3_decode(F) == s


def test_rc_f3_decode_examples():
    assert rc_f3_decode(FinSet([a0, *rc_triple(2)])) == Seq([a0])
    assert rc_f3_decode(EMPTY) == Seq()
    assert rc_f3_decode(FinSet([a0, b0])) is None


def test_rc_group_element_examples():
    assert all(rc_group_element({0: 0, 1: 0})(a) == a for a in RC3)
    g = rc_group_element({0: 1})
    assert (g(a0), g(b0), g(c0)) == (b0, c0, a0)


def test_rc_injections_equivariant_under_all_rotations():
    domains = [
        (rc_f1, list(enum_kind(Kind.UPAIR, RC3))),
        (rc_f2, list(enum_kind(Kind.OPAIR, RC3))),
        (rc_f3, list(enum_kind(Kind.ISEQ, RC3, 3))),
    ]
    for rots in itertools.product(range(3), repeat=3):
        g = rc_group_element(dict(enumerate(rots)))
        for fn, dom in domains:
            for x in dom:
                assert act(g, fn(x)) == fn(act(g, x))


# -- rz -----------------------------------------------------------------------


def test_rz_examples():
    one, three = rz_points([1, 3])
    assert rz_inject("unordered_to_square", FinSet([three, one])) == Pair(one, three)
    two, three, five = rz_points([2, 3, 5])
    assert rz_inject("fin_to_iseq", FinSet([two, five, three])) == Seq([two, three, five])


def test_rz_square_to_fin_exhaustive():
    markers = rz_points([Fraction(1, 2), 2, Fraction(7, 2), 5])
    ground = markers + rz_points([-1, 1, 3, 4, 6])
    table = {p: rz_inject("square_to_fin", p, markers) for p in enum_kind(Kind.OPAIR, ground)}
    assert len(table) == 81 and not oracles.collisions(table)


def test_rz_square_to_fin_needs_four_markers():
    with pytest.raises(ValueError):
        rz_inject("square_to_fin", Pair(*rz_points([1, 2])), rz_points([1, 2, 3]))
    assert issubclass(TableGapError, ValueError)


def test_rz_order_maps_equivariant():
    pts = rz_points([1, 2, 3, 4, 5, 6])
    pool = rz_points([0, Fraction(3, 2), Fraction(7, 2), 7])
    maps = order_relabelings(pts, pool)
    assert len(maps) == 210
    subsets = list(enum_kind(Kind.FIN, pts))
    upairs = list(enum_kind(Kind.UPAIR, pts))
    for pi in maps:
        for E in subsets:
            assert act(pi, rz_inject("fin_to_iseq", E)) == rz_inject("fin_to_iseq", act(pi, E))
        for s in upairs:
            assert act(pi, rz_inject("unordered_to_square", s)) == rz_inject("unordered_to_square", act(pi, s))
