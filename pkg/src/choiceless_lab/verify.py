"""Refutation engine.

Positive edges are checked by running the shipped injections over a finite
window: exhaustive injectivity plus invariance of the function graph under
the generators of ``Fix(E)``. Negative edges can only be checked at desk
scale. A desk check replays the symmetry argument on a bounded window,
either as a counting gap, as a survivor count, or by refuting every
candidate image. Such a claim carries ``scope="desk"``. A theorem-level
negative claim can never come out ``verified``, and
:class:`VerifyReport` rejects the combination outright.

Every ``verified`` or ``refuted`` report carries a witness that
:func:`replay_witness` can re-check from the witness alone. Subjects
(function, domain, group) are described by small JSON descriptors, so a
replay rebuilds them instead of trusting stored tables.
"""

from __future__ import annotations

import functools
import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from . import classic, fraisse
from .symmetry import (
    DomainError, GroupSpec, InconclusiveTruncation, Permutation, act, fix_generators, rc_triple, rz_atom,
)
from .universe import (
    Atom, FinSet, Kind, Pair, Seq, atoms_of, base, count_kind, decode, decode_atom, encode, encode_atom,
    enum_kind, sort_key,
)

VERIFIED = "verified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive-truncation"
OUTCOMES = (VERIFIED, REFUTED, INCONCLUSIVE)
DIRECTIONS = ("le", "not-le")
METHODS = ("explicit-witness", "counting", "support-contradiction")
SCOPES = ("theorem", "desk")
MODELS = ("n", "z", "rn", "rc", "rz")
KIND_TAGS = (Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ)

# strict chains, smallest first
CHAINS = {
    "n": (Kind.UPAIR, Kind.FIN, Kind.OPAIR, Kind.ISEQ),
    "z": (Kind.OPAIR, Kind.UPAIR, Kind.ISEQ, Kind.FIN),
    "rn": (Kind.OPAIR, Kind.ISEQ, Kind.UPAIR, Kind.FIN),
    "rc": (Kind.UPAIR, Kind.OPAIR, Kind.ISEQ, Kind.FIN),
    "rz": (Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ),
}


# -- claims and reports ------------------------------------------------------


@dataclass(frozen=True)
class EdgeClaim:
    """``source <= target`` (``le``) or its negation (``not-le``) in a model."""

    source: Kind
    target: Kind
    direction: str
    model: str
    method: str
    scope: str = "theorem"
    statement: str = ""

    def __post_init__(self):
        if self.source not in KIND_TAGS or self.target not in KIND_TAGS:
            raise ValueError("edge endpoints must be fin, opair, upair or iseq")
        if self.source == self.target:
            raise ValueError("an edge needs two different cardinalities")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}")
        if self.model not in MODELS + ("adhoc",):
            raise ValueError(f"unknown model {self.model!r}")

    @property
    def label(self) -> str:
        op = "<=" if self.direction == "le" else "!<="
        return f"{self.source.value} {op} {self.target.value}"

    def to_json(self) -> dict:
        return {
            "from": self.source.value, "to": self.target.value, "direction": self.direction,
            "model": self.model, "method": self.method, "scope": self.scope, "statement": self.statement,
        }

    @staticmethod
    def from_json(d: dict) -> "EdgeClaim":
        return EdgeClaim(Kind(d["from"]), Kind(d["to"]), d["direction"], d["model"], d["method"],
                         d.get("scope", "theorem"), d.get("statement", ""))


@dataclass
class VerifyReport:
    claim: EdgeClaim | None
    outcome: str
    witness: dict | None = None
    metrics: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if self.outcome in (VERIFIED, REFUTED) and self.witness is None:
            raise ValueError(f"a {self.outcome} report needs a witness")
        c = self.claim
        if c is not None and c.direction == "not-le" and c.scope == "theorem" and self.outcome == VERIFIED:
            raise ValueError("a theorem-level negative edge cannot be verified on a finite window")

    def with_claim(self, claim: EdgeClaim, bounds: Mapping | None = None) -> "VerifyReport":
        return VerifyReport(claim, self.outcome, self.witness, dict(self.metrics),
                            dict(bounds) if bounds is not None else dict(self.bounds))

    def to_json(self) -> dict:
        return {
            "claim": self.claim.to_json() if self.claim is not None else None,
            "outcome": self.outcome,
            "witness": self.witness,
            "metrics": self.metrics,
            "bounds": self.bounds,
        }

    @staticmethod
    def from_json(d: dict) -> "VerifyReport":
        claim = EdgeClaim.from_json(d["claim"]) if d.get("claim") else None
        return VerifyReport(claim, d["outcome"], d.get("witness"), d.get("metrics", {}), d.get("bounds", {}))


def overall_outcome(reports: Iterable[VerifyReport]) -> str:
    """``refuted`` beats ``inconclusive-truncation`` beats ``verified``."""
    outcomes = {r.outcome for r in reports}
    if REFUTED in outcomes:
        return REFUTED
    if INCONCLUSIVE in outcomes:
        return INCONCLUSIVE
    return VERIFIED


# -- subject descriptors -------------------------------------------------------
#
# ground:   {"family": "rc", "triples": n} | {"family": "base", "size": k}
#           | {"family": "rz", "values": ["1/2", ...]} | {"family": "rn", "base": b, "depth": d}
# model:    {"builder": "xyz" | "tower" | "plain", ...}
# function: {"name": "rc_f1" | ... | "table", ...}
# domain:   {"kind": "upair", "ground": ..., "maxlen": n} | {"table": {...}}
# group:    {"kind": "rc" | "free" | "rz" | "rn" | "model", ...}


def _frozen(desc) -> str:
    return json.dumps(desc, sort_keys=True)


def ground_atoms(desc: Mapping) -> list[Atom]:
    fam = desc["family"]
    if fam == "rc":
        return [a for n in range(desc["triples"]) for a in rc_triple(n)]
    if fam == "base":
        return [base(i) for i in range(desc["size"])]
    if fam == "rz":
        return [rz_atom(Fraction(v)) for v in desc["values"]]
    if fam == "rn":
        return classic.rn_build(desc["base"], desc["depth"])
    raise ValueError(f"unknown atom family {fam!r}")


@functools.lru_cache(maxsize=64)
def _build_model(key: str):
    desc = json.loads(key)
    kind = desc["builder"]
    mss = desc.get("max_set_size")
    if kind == "xyz":
        return fraisse.xyz_extension_n(fraisse.ModelN(), desc["t"], mss)
    if kind == "tower":
        return fraisse.copy_tower_n(fraisse.ModelN(), desc["t"], mss)
    if kind == "plain":
        seed = fraisse.ModelZ([base(i) for i in range(desc["seed"])], max_len=desc["max_len"])
        return fraisse.plain_extension_z(seed, desc["t"], desc["max_len"])
    raise ValueError(f"unknown model builder {kind!r}")


def build_model(desc: Mapping):
    return _build_model(_frozen(desc))


def _structure(built):
    return built.model if isinstance(built, (fraisse.XYZExtension, fraisse.CopyTower)) else built


def table_of(desc: Mapping) -> dict:
    return _structure(build_model(desc["model"])).maps[desc["map"]]


def function_of(desc: Mapping) -> Callable:
    name = desc["name"]
    if name == "rc_f1":
        return classic.rc_f1
    if name in ("rc_f2", "square_to_iseq"):
        return classic.rc_f2
    if name == "rc_f3":
        return classic.rc_f3
    if name == "inclusion":
        return lambda x: x
    if name == "rz_unordered_to_square":
        return lambda x: classic.rz_inject("unordered_to_square", x)
    if name == "rz_fin_to_iseq":
        return lambda x: classic.rz_inject("fin_to_iseq", x)
    if name == "rz_square_to_fin":
        markers = [rz_atom(Fraction(v)) for v in desc["markers"]]
        return lambda x: classic.rz_inject("square_to_fin", x, markers)
    if name == "table":
        return table_of(desc["table"]).__getitem__
    raise ValueError(f"unknown function {name!r}")


def domain_of(desc: Mapping) -> list:
    if "table" in desc:
        return sorted(table_of(desc["table"]), key=sort_key)
    kind = Kind.parse(desc["kind"])
    return list(enum_kind(kind, ground_atoms(desc["ground"]), desc.get("maxlen")))


def model_permutations(desc: Mapping) -> list[Permutation]:
    """Automorphisms shipped with a built model: the six ``{x,y,z}``
    permutations, the stage-0 tower map, or the seed permutations of a
    plain extension extended through the fresh blocks."""
    built = build_model(desc)
    if isinstance(built, fraisse.XYZExtension):
        return built.permutations()
    if isinstance(built, fraisse.CopyTower):
        pi = fraisse.tower_automorphism(built, 0)
        return [pi] if pi is not None else []
    seed = [base(i) for i in range(desc["seed"])]
    out = []
    for img in itertools.permutations(seed):
        pi = fraisse.plain_extension_automorphism(built, Permutation(dict(zip(seed, img))))
        if pi is not None:
            out.append(pi)
    return out


def group_generators(desc: Mapping, E: Iterable[Atom]) -> list[Permutation]:
    """Generators of ``Fix(E)`` for a group descriptor."""
    E = set(E)
    kind = desc["kind"]
    if kind == "rc":
        return fix_generators(GroupSpec.rc(desc["triples"]), E)
    if kind == "free":
        return fix_generators(GroupSpec.free(ground_atoms(desc["ground"])), E)
    if kind == "rz":
        pool = [rz_atom(Fraction(v)) for v in desc["pool"]]
        return fix_generators(GroupSpec.rz(ground_atoms(desc["ground"]), pool), E)
    if kind == "rn":
        return fix_generators(GroupSpec.rn(classic.rn_build(desc["base"], desc["depth"])), E)
    if kind == "model":
        return [g for g in model_permutations(desc["model"]) if g.fixes(E)]
    raise ValueError(f"unknown group kind {kind!r}")


# -- primitive checks --------------------------------------------------------------


def _call(fn, x):
    return fn[x] if isinstance(fn, Mapping) else fn(x)


def _enc_pair_table(fn, domain) -> list:
    return [[encode(x), encode(_call(fn, x))] for x in domain]


def check_injective(fn, domain: Iterable | None = None, *, subject: Mapping | None = None,
                    claim: EdgeClaim | None = None, table_limit: int = 2000) -> VerifyReport:
    """Exhaustive injectivity over a finite domain.

    ``fn`` is a callable or a table; without ``domain`` the table keys are
    used. A verified report carries the subject descriptor when given and
    the full table otherwise (up to ``table_limit`` rows).
    """
    if domain is None:
        if not isinstance(fn, Mapping):
            raise ValueError("a callable needs an explicit domain")
        domain = sorted(fn, key=sort_key)
    domain = list(domain)
    seen: dict = {}
    for x in domain:
        y = _call(fn, x)
        if y in seen and seen[y] != x:
            witness = {"type": "collision", "inputs": [encode(seen[y]), encode(x)], "image": encode(y)}
            if subject is not None:
                witness["subject"] = subject
            return VerifyReport(claim, REFUTED, witness, {"domain_size": len(domain)})
        seen[y] = x
    witness = {"type": "exhaustive-injective", "size": len(domain)}
    if subject is not None:
        witness["subject"] = subject
    elif len(domain) <= table_limit:
        witness["table"] = _enc_pair_table(fn, domain)
    else:
        witness = None
    if witness is None:
        return VerifyReport(claim, INCONCLUSIVE, None, {"domain_size": len(domain), "reason": "table too large to record"})
    return VerifyReport(claim, VERIFIED, witness, {"domain_size": len(domain), "images": len(seen)})


def _generators(group, E) -> list[Permutation]:
    if isinstance(group, GroupSpec):
        return fix_generators(group, E)
    if isinstance(group, Mapping):
        return group_generators(group, E)
    E = set(E)
    return [g for g in group if g.fixes(E)]


def check_equivariant(fn, group, E: Iterable[Atom], domain: Iterable | None = None, *,
                      subject: Mapping | None = None, claim: EdgeClaim | None = None) -> VerifyReport:
    """Invariance of the graph of ``fn`` under every generator of ``Fix(E)``.

    ``group`` is a :class:`GroupSpec`, a group descriptor or an explicit
    list of permutations. A table whose domain is not closed under a
    generator cannot be judged and gives ``inconclusive-truncation``; so
    does a group truncation that fails to close.
    """
    E = frozenset(E)
    if domain is None:
        if not isinstance(fn, Mapping):
            raise ValueError("a callable needs an explicit domain")
        domain = sorted(fn, key=sort_key)
    domain = list(domain)
    try:
        gens = _generators(group, E)
    except InconclusiveTruncation as exc:
        return VerifyReport(claim, INCONCLUSIVE, None, {"reason": str(exc)})
    checked = 0
    for g in gens:
        for x in domain:
            try:
                gx = act(g, x)
                y = _call(fn, x)
                gy = act(g, y)
                fgx = _call(fn, gx)
            except (DomainError, KeyError):
                return VerifyReport(claim, INCONCLUSIVE, None,
                                    {"reason": "domain not closed under a generator", "input": encode(x)})
            checked += 1
            if fgx != gy:
                witness = {
                    "type": "not-equivariant", "permutation": g.to_json(), "input": encode(x),
                    "image": encode(y), "moved_input": encode(gx), "image_of_moved": encode(fgx),
                }
                if subject is not None:
                    witness["subject"] = subject
                return VerifyReport(claim, REFUTED, witness, {"generators": len(gens), "checked": checked})
    witness = {"type": "exhaustive-equivariant", "support": [encode_atom(a) for a in sorted(E, key=sort_key)],
               "generators": len(gens), "size": len(domain)}
    if subject is not None:
        witness["subject"] = subject
    else:
        witness["table"] = _enc_pair_table(fn, domain)
        witness["permutations"] = [g.to_json() for g in gens]
    return VerifyReport(claim, VERIFIED, witness, {"generators": len(gens), "checked": checked})


def counting_gap(kindA: Kind | str, kindB: Kind | str, ground_size: int, extra: int) -> tuple[int, int, bool]:
    """``(|kindA(k)|, |kindB(k + extra)|, first > second)``."""
    kindA = Kind.parse(kindA) if isinstance(kindA, str) else kindA
    kindB = Kind.parse(kindB) if isinstance(kindB, str) else kindB
    if ground_size < 0 or extra < 0:
        raise ValueError("sizes must be non-negative")
    a = count_kind(kindA, ground_size)
    b = count_kind(kindB, ground_size + extra)
    return a, b, a > b


def counting_report(kindA, kindB, ground_size: int, extra: int, claim: EdgeClaim | None = None) -> VerifyReport:
    a, b, gap = counting_gap(kindA, kindB, ground_size, extra)
    kA = Kind.parse(kindA) if isinstance(kindA, str) else kindA
    kB = Kind.parse(kindB) if isinstance(kindB, str) else kindB
    witness = {"type": "counting", "kinds": [kA.value, kB.value], "ground": ground_size, "extra": extra,
               "counts": [a, b]}
    return VerifyReport(claim, VERIFIED if gap else REFUTED, witness, {"counts": [a, b]})


def refute_candidate_with_support(fn: Mapping, E: Iterable[Atom], group, *, claim: EdgeClaim | None = None,
                                  domain: Iterable | None = None) -> VerifyReport:
    """Look for a contradiction between ``fn`` and the support ``E``.

    For each input ``x`` and each generator ``pi`` of ``Fix(E)``:

    * ``pi x = x`` but ``pi fn(x) != fn(x)``: the image is moved (``moved-image``);
    * ``pi x != x`` but ``pi fn(x) = fn(x)``: ``fn(pi x)`` would have to equal
      ``fn(x)``, a collision forced by the swap (``forced-collision``);
    * ``pi x`` is tabled with ``fn(pi x) != pi fn(x)`` (``not-equivariant``).

    Finding nothing proves nothing, so the fallback is
    ``inconclusive-truncation``.
    """
    E = frozenset(E)
    try:
        gens = _generators(group, E)
    except InconclusiveTruncation as exc:
        return VerifyReport(claim, INCONCLUSIVE, None, {"reason": str(exc)})
    xs = sorted(fn if domain is None else domain, key=sort_key)
    for x in xs:
        y = fn[x]
        for g in gens:
            try:
                gx, gy = act(g, x), act(g, y)
            except DomainError:
                continue
            kind = None
            if gx == x and gy != y:
                kind = "moved-image"
            elif gx != x and gy == y:
                kind = "forced-collision"
            elif gx != x and gx in fn and fn[gx] != gy:
                kind = "not-equivariant"
            if kind is None:
                continue
            witness = {"type": kind, "permutation": g.to_json(), "input": encode(x), "image": encode(y),
                       "support": [encode_atom(a) for a in sorted(E, key=sort_key)]}
            if kind == "not-equivariant":
                witness["moved_input"] = encode(gx)
                witness["image_of_moved"] = encode(fn[gx])
            return VerifyReport(claim, REFUTED, witness, {"inputs": len(xs), "generators": len(gens)})
    return VerifyReport(claim, INCONCLUSIVE, None, {"inputs": len(xs), "generators": len(gens)})


# -- desk checks for negative edges ---------------------------------------------------


def _all_moved(objects, gens, inside: frozenset) -> tuple[int, int, object]:
    """How many objects with an atom outside ``inside`` some generator moves."""
    total = unmoved = 0
    example = None
    for t in objects:
        if atoms_of(t) <= inside:
            continue
        total += 1
        if not any(act(g, t) != t for g in gens):
            unmoved += 1
            example = example if example is not None else t
    return total, unmoved, example


def desk_support_counting(source: str, target: str, group: dict, support: list, free: list,
                          window: dict) -> dict:
    """The counting refutation at desk scale.

    ``source``-objects over ``free`` outnumber ``target``-objects over
    ``support + free``; every ``target``-object over the window with an
    atom outside ``support + free`` is moved by ``Fix(support + free)``
    (which fixes every ``source``-object over ``free``). Together these
    leave some source object whose image is moved while it is fixed.
    """
    S = [decode_atom(a) for a in support]
    X = [decode_atom(a) for a in free]
    src_atoms = X if X else S
    a, b, gap = counting_gap(source, target, len(src_atoms), len(set(S) | set(X)) - len(src_atoms))
    inside = frozenset(S) | frozenset(X)
    gens = group_generators(group, inside)
    objs = enum_kind(Kind.parse(target), ground_atoms(window))
    total, unmoved, example = _all_moved(objs, gens, inside)
    return {"ok": gap and unmoved == 0, "counts": [a, b], "outside": total, "unmoved": unmoved,
            "example": encode(example) if example is not None else None}


def desk_rc_triples(triples: int, maxlen: int, support: list, samples: int, seed: int) -> dict:
    """``fin <= iseq`` fails in the triple model.

    Every ``P_n`` is fixed setwise by the whole group, so its image must be
    fixed by ``Fix(E)``. With ``E`` empty the only such sequence over the
    window is the empty one, and ``triples > 1`` sets cannot share it.
    Random candidates on ``P_0 .. P_4`` with supports inside ``P_0 + P_1``
    are refuted one by one.
    """
    E = [decode_atom(a) for a in support]
    group = {"kind": "rc", "triples": triples}
    gens = group_generators(group, E)
    window = ground_atoms({"family": "rc", "triples": triples})
    survivors = [s for s in enum_kind(Kind.ISEQ, window, maxlen) if all(act(g, s) == s for g in gens)]
    inputs = [FinSet(rc_triple(n)) for n in range(triples)]
    rng = random.Random(seed)
    sample_window = ground_atoms({"family": "rc", "triples": 5})
    refuted = 0
    pool01 = ground_atoms({"family": "rc", "triples": 2})
    for _ in range(samples):
        E3 = rng.sample(pool01, rng.randrange(0, len(pool01) + 1))
        table = {}
        for n in range(5):
            length = rng.randrange(1, 4)
            table[FinSet(rc_triple(n))] = Seq(rng.sample(sample_window, length))
        rep = refute_candidate_with_support(table, E3, {"kind": "rc", "triples": 5})
        refuted += rep.outcome == REFUTED
    return {"ok": len(inputs) > len(survivors) and refuted == samples, "inputs": len(inputs),
            "survivors": len(survivors), "sampled": samples, "sampled_refuted": refuted}


def desk_xyz_cases(t: int, max_set_size: int | None) -> dict:
    """``opair <= fin`` fails: for each of the eight traces ``F & {x,y,z}``
    of a candidate ``f(<x,y>)`` some transposition of ``x, y, z`` moves
    ``<x,y>`` while fixing ``F``, forcing a collision."""
    model = {"builder": "xyz", "t": t, "max_set_size": max_set_size}
    ext = build_model(model)
    x, y, z = ext.xyz
    extra = ext.a_atoms()[:1]
    perms = ext.permutations()
    autos = sum(fraisse.is_automorphism(ext.model, p)[0] for p in perms)
    refuted = 0
    cases = 0
    for r in range(4):
        for S in itertools.combinations((x, y, z), r):
            cases += 1
            table = {Pair(x, y): FinSet(set(S) | set(extra))}
            rep = refute_candidate_with_support(table, (), perms)
            refuted += rep.outcome == REFUTED
    return {"ok": refuted == cases and autos == len(perms), "cases": cases, "refuted": refuted,
            "automorphisms": autos}


def desk_xyz_sequences(t: int, max_set_size: int | None) -> dict:
    """``iseq <= opair`` fails: the twelve sequences in ``S`` can only go
    to the six off-diagonal pairs over ``{x,y,z}``."""
    ext = build_model({"builder": "xyz", "t": t, "max_set_size": max_set_size})
    perms = ext.permutations()
    seqs = fraisse.xyz_sequences(*ext.xyz)
    window = sorted(ext.model.atoms, key=sort_key)
    admissible = set()
    for s in seqs:
        for p in enum_kind(Kind.OPAIR, window):
            bad = any((act(g, s) != s and act(g, p) == p) or (act(g, s) == s and act(g, p) != p) for g in perms)
            if not bad:
                admissible.add(p)
    offdiag = set(fraisse.xyz_offdiagonal_pairs(*ext.xyz))
    return {"ok": len(admissible) < len(seqs), "S": len(seqs), "images": len(admissible),
            "images_are_offdiagonal": admissible == offdiag, "window": len(window)}


def desk_tower(t: int, max_set_size: int | None) -> dict:
    """``fin <= upair`` fails on stage-0 images: the transposing map is an
    automorphism over ``N1`` that fixes each stage-0 pair ``{x_E, y_E}``
    and moves ``u``."""
    tower = build_model({"builder": "tower", "t": t, "max_set_size": max_set_size})
    pi = fraisse.tower_automorphism(tower, 0)
    ok_auto = pi is not None and fraisse.is_automorphism(tower.model, pi)[0]
    u = FinSet(tower.u)
    pairs = good = 0
    for E in tower.stages[0].handled:
        if atoms_of(E) <= tower.base.atoms:
            continue
        x, y = tower.model.h[E]
        pairs += 1
        if ok_auto and act(pi, FinSet((x, y))) == FinSet((x, y)) and act(pi, u) != u:
            good += 1
    return {"ok": ok_auto and pairs > 0 and good == pairs, "pairs": pairs, "swapped": good,
            "automorphism": bool(ok_auto), "atoms": len(tower.model.atoms)}


def _block_transpositions(M) -> list[Permutation]:
    """Swaps inside unordered output blocks, extended through the keys."""
    out = []
    for name, table in sorted(M.maps.items()):
        for x in sorted(table, key=sort_key):
            y = table[x]
            if isinstance(y, FinSet):
                for a, b in itertools.combinations(sorted(y, key=sort_key), 2):
                    pi = fraisse.extend_by_keys({a: b, b: a}, M.atoms)
                    if pi is not None and fraisse.is_automorphism(M, pi)[0]:
                        out.append(pi)
    return out


def desk_plain_window(seed: int, t: int, max_len: int, input_kind: str, target: str, target_maxlen: int | None) -> dict:
    """The plain-extension refutations.

    The input is the canonical object of ``input_kind`` over the seed
    atoms. Each candidate image over the window is refuted either by an
    automorphism that fixes the input and moves the candidate, or because
    the closure of the candidate's atoms misses a seed atom (the limit
    then moves the seed while fixing the candidate).
    """
    model = {"builder": "plain", "seed": seed, "t": t, "max_len": max_len}
    M = build_model(model)
    seeds = [base(i) for i in range(seed)]
    x = {"upair": FinSet(seeds), "iseq": Seq(seeds), "fin": FinSet(seeds)}[input_kind]
    gens = [g for g in model_permutations(model) if act(g, x) == x] + _block_transpositions(M)
    window = sorted(M.atoms, key=sort_key)
    total = by_auto = by_closure = 0
    example = None
    cache: dict = {}
    for c in enum_kind(Kind.parse(target), window, target_maxlen):
        total += 1
        if any(act(g, c) != c for g in gens):
            by_auto += 1
            continue
        key = atoms_of(c)
        if key not in cache:
            cache[key] = set(seeds) <= fraisse.closure(key, M)
        if not cache[key]:
            by_closure += 1
            continue
        example = example if example is not None else c
    return {"ok": by_auto + by_closure == total, "candidates": total, "by_automorphism": by_auto,
            "by_closure": by_closure, "automorphisms": len(gens),
            "unrefuted_example": encode(example) if example is not None else None}


DESK_CHECKS: dict[str, Callable[..., dict]] = {
    "support-counting": desk_support_counting,
    "rc-triples": desk_rc_triples,
    "xyz-cases": desk_xyz_cases,
    "xyz-sequences": desk_xyz_sequences,
    "tower": desk_tower,
    "plain-window": desk_plain_window,
}


def run_desk(check: str, params: Mapping, claim: EdgeClaim | None = None) -> VerifyReport:
    metrics = DESK_CHECKS[check](**params)
    ok = metrics.pop("ok")
    witness = {"type": "desk", "check": check, "params": dict(params), "metrics": dict(metrics)}
    return VerifyReport(claim, VERIFIED if ok else INCONCLUSIVE, witness if ok else None, metrics)


# -- positive edges ---------------------------------------------------------------------


def check_subject(subject: Mapping, claim: EdgeClaim | None = None) -> VerifyReport:
    """Injectivity and equivariance of a described subject, combined."""
    fn = function_of(subject["function"])
    domain = domain_of(subject["domain"])
    if not domain:
        return VerifyReport(claim, INCONCLUSIVE, None, {"reason": "empty window"})
    E = [decode_atom(a) for a in subject.get("support", [])]
    inj = check_injective(fn, domain, subject=dict(subject), claim=claim)
    if inj.outcome != VERIFIED:
        return inj
    eq = check_equivariant(fn, subject["group"], E, domain, subject=dict(subject), claim=claim)
    if eq.outcome != VERIFIED:
        return eq
    witness = {"type": "explicit", "checks": [inj.witness, eq.witness]}
    metrics = {"domain_size": len(domain), "generators": eq.metrics["generators"]}
    return VerifyReport(claim, VERIFIED, witness, metrics)


# -- replay -------------------------------------------------------------------------------


def replay_witness(witness: Mapping) -> bool:
    """Re-derive the contradiction (or the verification) from ``witness``."""
    kind = witness["type"]
    if kind in ("moved-image", "forced-collision", "not-equivariant"):
        pi = Permutation.from_json(witness["permutation"])
        x, y = decode(witness["input"]), decode(witness["image"])
        if "support" in witness and not pi.fixes(decode_atom(a) for a in witness["support"]):
            return False
        try:
            px, py = act(pi, x), act(pi, y)
        except DomainError:
            return False
        if kind == "moved-image":
            return px == x and py != y
        if kind == "forced-collision":
            return px != x and py == y
        gx, fgx = decode(witness["moved_input"]), decode(witness["image_of_moved"])
        if "subject" in witness:
            fn = function_of(witness["subject"]["function"])
            if _call(fn, x) != y or _call(fn, gx) != fgx:
                return False
        return px == gx and py != fgx
    if kind == "collision":
        a, b = (decode(v) for v in witness["inputs"])
        if a == b:
            return False
        if "subject" in witness:
            fn = function_of(witness["subject"]["function"])
            return _call(fn, a) == _call(fn, b) == decode(witness["image"])
        return True
    if kind == "counting":
        a, b, gap = counting_gap(witness["kinds"][0], witness["kinds"][1], witness["ground"], witness["extra"])
        return gap and [a, b] == list(witness["counts"])
    if kind == "exhaustive-injective":
        if "subject" in witness:
            s = witness["subject"]
            rep = check_injective(function_of(s["function"]), domain_of(s["domain"]), subject=s)
        else:
            table = {decode(x): decode(y) for x, y in witness["table"]}
            rep = check_injective(table)
        return rep.outcome == VERIFIED and rep.witness["size"] == witness["size"]
    if kind == "exhaustive-equivariant":
        E = [decode_atom(a) for a in witness["support"]]
        if "subject" in witness:
            s = witness["subject"]
            rep = check_equivariant(function_of(s["function"]), s["group"], E, domain_of(s["domain"]), subject=s)
        else:
            table = {decode(x): decode(y) for x, y in witness["table"]}
            perms = [Permutation.from_json(p) for p in witness["permutations"]]
            rep = check_equivariant(table, perms, E)
        return rep.outcome == VERIFIED
    if kind == "explicit":
        return all(replay_witness(w) for w in witness["checks"])
    if kind == "desk":
        metrics = DESK_CHECKS[witness["check"]](**witness["params"])
        ok = metrics.pop("ok")
        return ok and metrics == witness["metrics"]
    raise ValueError(f"unknown witness type {kind!r}")


def replay(report: VerifyReport) -> bool:
    """``True`` when the report's witness reproduces its outcome."""
    if report.witness is None:
        return report.outcome == INCONCLUSIVE
    return replay_witness(report.witness)


# -- diagram reports ------------------------------------------------------------------------

DEFAULT_BOUNDS = {"triples": 4, "stages": 1, "size_bound": 3, "maxlen": 3, "k": 5, "seed": 0, "samples": 20,
                  "max_set_size": None}


def _claim(model, src, dst, direction, method, scope="desk", statement=""):
    return EdgeClaim(src, dst, direction, model, method, scope, statement)


def _cited(model, src, dst, direction, statement) -> VerifyReport:
    claim = _claim(model, src, dst, direction, "support-contradiction" if direction == "not-le" else "explicit-witness",
                   "theorem", statement)
    return VerifyReport(claim, INCONCLUSIVE, None, {"reason": "cited result, no desk-scale witness"})


def _subject(name, kind, ground, group, maxlen=None, support=(), **extra):
    fn = {"name": name, **extra}
    dom = {"kind": kind, "ground": ground}
    if maxlen is not None:
        dom["maxlen"] = maxlen
    return {"function": fn, "domain": dom, "group": group, "support": [encode_atom(a) for a in support]}


def _table_subject(model, name, group):
    t = {"model": model, "map": name}
    return {"function": {"name": "table", "table": t}, "domain": {"table": t}, "group": group, "support": []}


def _rc_reports(b) -> list[VerifyReport]:
    T = b["triples"]
    g = {"family": "rc", "triples": T}
    grp = {"kind": "rc", "triples": T}
    U, O, F, I = Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ
    out = [
        check_subject(_subject("rc_f1", "upair", g, grp), _claim("rc", U, O, "le", "explicit-witness")),
        check_subject(_subject("rc_f2", "opair", g, grp), _claim("rc", O, I, "le", "explicit-witness")),
        check_subject(_subject("rc_f3", "iseq", g, grp, maxlen=min(b["maxlen"], 3)),
                      _claim("rc", I, F, "le", "explicit-witness")),
        check_subject(_subject("inclusion", "upair", g, grp), _claim("rc", U, F, "le", "explicit-witness")),
    ]
    E = [encode_atom(a) for a in rc_triple(0)]
    out.append(run_desk("support-counting", {"source": "opair", "target": "upair", "group": grp, "support": E,
                                             "free": [], "window": g},
                        _claim("rc", O, U, "not-le", "counting",
                               statement="|E^2| > |[E]^2| for E = P_0; Fix(E) moves every 2-set off E")))
    rep = run_desk("support-counting", {"source": "iseq", "target": "opair", "group": grp, "support": E,
                                        "free": [], "window": g},
                   _claim("rc", I, O, "not-le", "counting",
                          statement="|iseq(E)| > |E^2| for E = P_0; Fix(E) moves every pair off E"))
    S = fraisse.xyz_sequences(*rc_triple(0))
    rep.metrics["S"] = len(S)
    rep.metrics["offdiagonal_pairs"] = len(fraisse.xyz_offdiagonal_pairs(*rc_triple(0)))
    out.append(rep)
    out.append(run_desk("rc-triples", {"triples": T, "maxlen": min(b["maxlen"], 2), "support": [],
                                       "samples": b["samples"], "seed": b["seed"]},
                        _claim("rc", F, I, "not-le", "support-contradiction",
                               statement="the triples P_n need Fix(E)-fixed images; random candidates refuted")))
    return out


def _rn_reports(b) -> list[VerifyReport]:
    U, O, F, I = Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ
    g = {"family": "rn", "base": 2, "depth": 1}
    grp = {"kind": "rn", "base": 2, "depth": 1}
    out = [
        check_subject(_subject("square_to_iseq", "opair", g, grp), _claim("rn", O, I, "le", "explicit-witness")),
        _cited("rn", I, U, "le", "seq(m) < [m]^2 is a cited result"),
        check_subject(_subject("inclusion", "upair", g, grp), _claim("rn", U, F, "le", "explicit-witness")),
        _cited("rn", U, I, "not-le", "seq(m) < [m]^2 is a cited result"),
    ]
    k_iseq = classic.least_k_iseq_over_square(3)
    k_fin = classic.least_k_fin_over_upair(3)
    for src, dst, k in ((I, O, k_iseq), (F, U, k_fin)):
        E = [encode_atom(base(i)) for i in range(3)]
        X = [encode_atom(base(i)) for i in range(3, 3 + k)]
        window = {"family": "rn", "base": 3 + k + 3, "depth": 1}
        group = {"kind": "rn", "base": 3 + k + 3, "depth": 1}
        rep = run_desk("support-counting", {"source": src.value, "target": dst.value, "group": group,
                                            "support": E, "free": X, "window": window},
                       _claim("rn", src, dst, "not-le", "counting",
                              statement=f"|E| = 3, k = {k}: counting gap over X and Fix(E + X) moves the rest"))
        rep.metrics["k"] = k
        out.append(rep)
    return out


def _rz_reports(b) -> list[VerifyReport]:
    U, O, F, I = Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ
    pts = ["1", "2", "3", "4", "5", "6"]
    pool = ["1/2", "7/2", "13/2"]
    g = {"family": "rz", "values": pts}
    grp = {"kind": "rz", "ground": g, "pool": pool}
    markers = ["1", "2", "3", "4"]
    g9 = {"family": "rz", "values": markers + ["1/2", "3/2", "5/2", "7/2", "5"]}
    grp9 = {"kind": "rz", "ground": g9, "pool": ["1/4", "5/4", "9/4", "13/4", "9/2", "6", "7"]}
    out = [
        check_subject(_subject("rz_unordered_to_square", "upair", g, grp), _claim("rz", U, O, "le", "explicit-witness")),
        check_subject(_subject("rz_square_to_fin", "opair", g9, grp9, support=[rz_atom(Fraction(m)) for m in markers],
                               markers=markers), _claim("rz", O, F, "le", "explicit-witness")),
        check_subject(_subject("rz_fin_to_iseq", "fin", g, grp), _claim("rz", F, I, "le", "explicit-witness")),
        check_subject(_subject("inclusion", "upair", g, grp), _claim("rz", U, F, "le", "explicit-witness")),
    ]
    for src, dst in ((O, U), (F, O), (I, F)):
        out.append(_cited("rz", src, dst, "not-le", "ordered Mostowski model, cited result"))
    return out


def _n_reports(b) -> list[VerifyReport]:
    U, O, F, I = Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ
    t, mss = b["stages"], b["max_set_size"]
    model = {"builder": "xyz", "t": t, "max_set_size": mss}
    small = {"family": "base", "size": 5}
    free = {"kind": "free", "ground": small}
    h_rep = check_subject(_table_subject(model, "h", {"kind": "model", "model": model}),
                          _claim("n", F, O, "le", "explicit-witness"))
    bad = fraisse.audit_xyz_rules(build_model(model))
    h_rep.metrics["rule_violations"] = len(bad)
    if bad and h_rep.outcome == VERIFIED:
        h_rep = VerifyReport(h_rep.claim, INCONCLUSIVE, None, h_rep.metrics)
    out = [
        check_subject(_subject("inclusion", "upair", small, free), _claim("n", U, F, "le", "explicit-witness")),
        h_rep,
        check_subject(_subject("square_to_iseq", "opair", small, free), _claim("n", O, I, "le", "explicit-witness")),
        run_desk("tower", {"t": min(t, 2), "max_set_size": mss},
                 _claim("n", F, U, "not-le", "support-contradiction",
                        statement="stage-0 images of the copy tower are swapped by an automorphism moving u")),
        run_desk("xyz-cases", {"t": t, "max_set_size": mss},
                 _claim("n", O, F, "not-le", "support-contradiction",
                        statement="all eight traces of f(<x,y>) on {x,y,z} force a collision")),
        run_desk("xyz-sequences", {"t": t, "max_set_size": mss},
                 _claim("n", I, O, "not-le", "counting", statement="|S| = 12 sequences, only six admissible images")),
    ]
    return out


def _z_reports(b) -> list[VerifyReport]:
    U, O, F, I = Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ
    t = b["stages"]
    model = {"builder": "plain", "seed": 3, "t": t, "max_len": 3}
    grp = {"kind": "model", "model": model}
    small = {"family": "base", "size": 5}
    out = [
        check_subject(_table_subject(model, "f", grp), _claim("z", O, U, "le", "explicit-witness")),
        check_subject(_table_subject(model, "g", grp), _claim("z", U, I, "le", "explicit-witness")),
        check_subject(_table_subject(model, "h", grp), _claim("z", I, F, "le", "explicit-witness")),
        check_subject(_subject("inclusion", "upair", small, {"kind": "free", "ground": small}),
                      _claim("z", U, F, "le", "explicit-witness")),
        run_desk("plain-window", {"seed": 2, "t": 1, "max_len": 2, "input_kind": "upair", "target": "opair",
                                  "target_maxlen": None},
                 _claim("z", U, O, "not-le", "support-contradiction",
                        statement="every candidate i({x,y}) over the window is moved or escapes the closure")),
        run_desk("plain-window", {"seed": 3, "t": 1, "max_len": 3, "input_kind": "iseq", "target": "upair",
                                  "target_maxlen": None},
                 _claim("z", I, U, "not-le", "support-contradiction",
                        statement="every candidate i(<x,y,z>) over the window is moved or escapes the closure")),
        run_desk("plain-window", {"seed": 3, "t": 1, "max_len": 3, "input_kind": "fin", "target": "iseq",
                                  "target_maxlen": 2},
                 _claim("z", F, I, "not-le", "support-contradiction",
                        statement="every candidate i({x,y,z}) over the window is moved by a 3-cycle or escapes")),
    ]
    return out


def _empty_reports(model: str) -> list[VerifyReport]:
    chain = CHAINS[model]
    out = []
    for lo, hi in zip(chain, chain[1:]):
        out.append(VerifyReport(_claim(model, lo, hi, "le", "explicit-witness"), INCONCLUSIVE, None,
                                {"reason": "empty model"}))
        out.append(VerifyReport(_claim(model, hi, lo, "not-le", "support-contradiction"), INCONCLUSIVE, None,
                                {"reason": "empty model"}))
    return out


def _is_empty(model: str, b) -> bool:
    if model == "rc":
        return b["triples"] <= 0
    if model in ("n", "z"):
        return b["stages"] <= 0
    return False


def diagram_report(model: str, bounds: Mapping | None = None) -> list[VerifyReport]:
    """One report per diagram edge, in a canonical order."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    b = dict(DEFAULT_BOUNDS)
    b.update({k: v for k, v in (bounds or {}).items() if v is not None})
    if _is_empty(model, b):
        reports = _empty_reports(model)
    else:
        reports = {"rc": _rc_reports, "rn": _rn_reports, "rz": _rz_reports, "n": _n_reports, "z": _z_reports}[model](b)
    used = {k: b[k] for k in sorted(b)}
    for r in reports:
        r.bounds = used
    reports.sort(key=lambda r: (r.claim.direction, CHAINS[model].index(r.claim.source),
                                CHAINS[model].index(r.claim.target), json.dumps(r.claim.to_json(), sort_keys=True)))
    return reports
