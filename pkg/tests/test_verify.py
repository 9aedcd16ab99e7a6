import json
import random

import pytest

from choiceless_lab import classic
from choiceless_lab.symmetry import GroupSpec, Permutation, rc_triple
from choiceless_lab.universe import FinSet, Kind, Pair, Seq, base, count_kind, decode, enum_kind
from choiceless_lab.verify import (
    CHAINS, INCONCLUSIVE, MODELS, REFUTED, VERIFIED, EdgeClaim, VerifyReport, build_model, check_equivariant,
    check_injective, counting_gap, diagram_report, overall_outcome, refute_candidate_with_support, replay,
)

import oracles

ATOMS10 = [base(i) for i in range(10)]
RC3 = [a for n in range(3) for a in rc_triple(n)]


def test_check_injective_examples():
    assert check_injective(lambda x: x, ATOMS10).outcome == VERIFIED
    rep = check_injective(lambda x: base(0), ATOMS10[:3])
    assert rep.outcome == REFUTED
    a, b = (decode(v) for v in rep.witness["inputs"])
    assert a != b
    assert check_injective(classic.rc_f3, enum_kind(Kind.ISEQ, RC3, 3)).outcome == VERIFIED


def test_check_injective_agrees_with_double_loop():
    rng = random.Random(1)
    for _ in range(100):
        n = rng.randint(1, 12)
        table = {base(i): base(rng.randrange(n + 3)) for i in range(n)}
        rep = check_injective(table)
        assert (rep.outcome == VERIFIED) == (not oracles.collisions(table))
        assert replay(rep)


def test_check_equivariant_examples():
    up3 = list(enum_kind(Kind.UPAIR, RC3))
    assert check_equivariant(classic.rc_f1, GroupSpec.rc(3), [], up3).outcome == VERIFIED
    free = GroupSpec.free(ATOMS10[:4])
    ups = list(enum_kind(Kind.UPAIR, ATOMS10[:4]))

    def by_raw_id(s):
        x, y = sorted(s, key=lambda a: a.payload[0])
        return Pair(x, y)

    rep = check_equivariant(by_raw_id, free, [], ups)
    assert rep.outcome == REFUTED
    pi = Permutation.from_json(rep.witness["permutation"])
    assert len(pi.carrier) == 2
    assert replay(rep)
    assert check_equivariant(by_raw_id, free, ATOMS10[:4], ups).outcome == VERIFIED


@pytest.mark.parametrize("a,b,k,extra,expected", [
    (Kind.ISEQ, Kind.OPAIR, 5, 3, (326, 64, True)),
    (Kind.FIN, Kind.UPAIR, 6, 3, (64, 36, True)),
    (Kind.UPAIR, Kind.OPAIR, 4, 0, (6, 16, False)),
])
def test_counting_gap_examples(a, b, k, extra, expected):
    assert counting_gap(a, b, k, extra) == expected
    assert expected[:2] == (count_kind(a, k), count_kind(b, k + extra))


def test_refute_rc_candidates():
    # a candidate on P_0..P_4 whose images use atoms of rotatable triples is refuted
    rng = random.Random(7)
    window = [a for n in range(5) for a in rc_triple(n)]
    E3 = [rc_triple(0)[0], rc_triple(1)[1]]
    group = {"kind": "rc", "triples": 5}
    for _ in range(100):
        table = {FinSet(rc_triple(n)): Seq(rng.sample(window, rng.randint(1, 3))) for n in range(5)}
        rep = refute_candidate_with_support(table, E3, group)
        moved = any(a.payload[0] >= 2 for s in table.values() for a in s)
        if moved:
            assert rep.outcome == REFUTED and replay(rep)
        assert rep.outcome != VERIFIED


def test_refute_z_candidate_by_three_cycle():
    model = {"builder": "plain", "seed": 3, "t": 1, "max_len": 3}
    M = build_model(model)
    x, y, z = (base(i) for i in range(3))
    fresh_atom = sorted(M.f[Pair(x, y)], key=repr)[0]
    table = {FinSet([x, y, z]): Seq([fresh_atom])}
    rep = refute_candidate_with_support(table, [], {"kind": "model", "model": model})
    assert rep.outcome == REFUTED and rep.witness["type"] == "moved-image"
    assert replay(rep)


def test_constant_candidate_with_full_support_is_inconclusive():
    table = {a: base(0) for a in ATOMS10[:4]}
    rep = refute_candidate_with_support(table, ATOMS10[:4], GroupSpec.free(ATOMS10[:4]))
    assert rep.outcome == INCONCLUSIVE


def test_theorem_negative_edge_cannot_be_verified():
    claim = EdgeClaim(Kind.FIN, Kind.ISEQ, "not-le", "rc", "support-contradiction", "theorem")
    with pytest.raises(ValueError):
        VerifyReport(claim, VERIFIED, {"type": "counting"})
    with pytest.raises(ValueError):
        VerifyReport(None, REFUTED, None)


@pytest.fixture(scope="module")
def reports():
    return {m: diagram_report(m) for m in MODELS}


def test_rc_all_edges_verified(reports):
    rc = reports["rc"]
    assert len(rc) == 7
    assert all(r.outcome == VERIFIED for r in rc)
    assert sum(r.claim.direction == "le" for r in rc) == 4
    (seq_edge,) = [r for r in rc if r.claim.label == "iseq !<= opair"]
    assert seq_edge.metrics["S"] == 12 and seq_edge.metrics["offdiagonal_pairs"] == 6


def test_every_witness_replays(reports):
    for model, reps in reports.items():
        for r in reps:
            assert replay(r), (model, r.claim.label)


def test_no_theorem_negative_edge_verified(reports):
    for reps in reports.values():
        for r in reps:
            if r.claim.direction == "not-le" and r.claim.scope == "theorem":
                assert r.outcome != VERIFIED


def test_reports_cover_the_chain(reports):
    for model, reps in reports.items():
        chain = CHAINS[model]
        ups = {(r.claim.source, r.claim.target) for r in reps if r.claim.direction == "le"}
        for lo, hi in zip(chain, chain[1:]):
            assert (lo, hi) in ups


def test_n_and_z_verified(reports):
    assert overall_outcome(reports["n"]) == VERIFIED
    assert overall_outcome(reports["z"]) == VERIFIED
    (h,) = [r for r in reports["n"] if r.claim.label == "fin <= opair"]
    assert h.metrics["rule_violations"] == 0


def test_cited_edges_stay_inconclusive(reports):
    for model in ("rn", "rz"):
        cited = [r for r in reports[model] if r.claim.scope == "theorem"]
        assert cited and all(r.outcome == INCONCLUSIVE for r in cited)


def test_empty_models_inconclusive():
    for model, bounds in (("rc", {"triples": 0}), ("n", {"stages": 0}), ("z", {"stages": 0})):
        reps = diagram_report(model, bounds)
        assert reps and all(r.outcome == INCONCLUSIVE for r in reps)


def test_report_json_roundtrip(reports):
    for r in reports["rc"]:
        again = VerifyReport.from_json(json.loads(json.dumps(r.to_json())))
        assert again.to_json() == r.to_json()
