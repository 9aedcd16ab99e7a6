"""The three concrete atom constructions.

* ``rn``: the epsilon-flip tower. Level ``n+1`` atoms are ``(n+1, p, eps)``
  with ``p`` a tuple of length at most ``n+1`` over level ``n``.
* ``rc``: countably many cyclically ordered triples ``P_n = {a_n, b_n, c_n}``
  with the explicit injections ``rc_f1``, ``rc_f2``, ``rc_f3``.
* ``rz``: the ordered rationals, with order-definable injections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from sympy import factorint, prime, primepi

from .symmetry import Permutation, RC_POS, rc_rotation, rc_triple, rz_atom
from .universe import Atom, FinSet, Pair, ResourceLimit, Seq, base, max_atoms

# -- rn: the epsilon-flip tower -----------------------------------------------


def rn_atom(level: int, p: Sequence[Atom], eps: int) -> Atom:
    return Atom("rn", (level, tuple(p), eps))


def rn_level(x: Atom) -> int:
    return 0 if x.tag == "base" else x.payload[0]


def rn_size(base_size: int, depth: int) -> int:
    size = base_size
    for n in range(depth):
        size += 2 * sum(size**k for k in range(n + 2))
    return size


def rn_build(base_size: int, depth: int, cap: int | None = None) -> list[Atom]:
    """The universe ``A_depth``, level by level."""
    if base_size < 1 or depth < 0:
        raise ValueError("need base_size >= 1 and depth >= 0")
    cap = max_atoms() if cap is None else cap
    size = rn_size(base_size, depth)
    if size > cap:
        raise ResourceLimit(f"rn universe has {size} atoms (cap {cap})", size=size)
    universe = [base(i) for i in range(base_size)]
    for n in range(depth):
        lower = list(universe)
        for k in range(n + 2):
            for p in itertools.product(lower, repeat=k):
                for eps in (0, 1):
                    universe.append(rn_atom(n + 1, p, eps))
    return universe


@dataclass(frozen=True)
class RNPerm:
    """A group element: a base permutation plus flip bits ``eps_{sigma,p}``.

    ``flips`` maps ``(level, p)`` to 1; absent keys mean 0.
    """

    base: Mapping[Atom, Atom] = field(default_factory=dict)
    flips: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "base", {a: b for a, b in dict(self.base).items() if a != b})
        object.__setattr__(self, "flips", frozenset(self.flips))
        if set(self.base) != set(self.base.values()):
            raise ValueError("base part is not a permutation")


def rn_act(sigma: RNPerm, x: Atom) -> Atom:
    if x.tag == "base":
        return sigma.base.get(x, x)
    level, p, eps = x.payload
    flip = 1 if (level, p) in sigma.flips else 0
    return rn_atom(level, tuple(rn_act(sigma, c) for c in p), eps ^ flip)


def rn_keys(universe: Iterable[Atom]) -> set:
    return {(x.payload[0], x.payload[1]) for x in universe if x.tag == "rn"}


def rn_compose(sigma: RNPerm, rho: RNPerm, universe: Iterable[Atom]) -> RNPerm:
    """``sigma o rho``: the flip at ``p`` is ``rho_p + sigma_{rho(p)}``."""
    universe = list(universe)
    bases = [a for a in universe if a.tag == "base"]
    new_base = {a: rn_act(sigma, rn_act(rho, a)) for a in bases}
    flips = set()
    for level, p in rn_keys(universe):
        moved = tuple(rn_act(rho, c) for c in p)
        bit = ((level, p) in rho.flips) ^ ((level, moved) in sigma.flips)
        if bit:
            flips.add((level, p))
    return RNPerm(new_base, flips)


def rn_to_permutation(sigma: RNPerm, universe: Iterable[Atom]) -> Permutation:
    table = {x: rn_act(sigma, x) for x in universe}
    struct = ("rn", tuple(sorted((repr(a), repr(b)) for a, b in sigma.base.items())),
              tuple(sorted(repr(k) for k in sigma.flips)))
    return Permutation(table, structure=struct)


def rn_perm_from_permutation(pi: Permutation, universe: Sequence[Atom]) -> RNPerm | None:
    """Recover the structured form of ``pi``, or None if ``pi`` is not in the group."""
    universe = list(universe)
    uni = set(universe)
    basepart = {a: pi(a) for a in universe if a.tag == "base"}
    if any(b.tag != "base" or b not in uni for b in basepart.values()):
        return None
    flips = set()
    sigma = RNPerm(basepart)
    for level in sorted({rn_level(x) for x in universe if x.tag == "rn"}):
        for x in universe:
            if x.tag != "rn" or x.payload[0] != level:
                continue
            lv, p, eps = x.payload
            img = pi(x)
            if img.tag != "rn" or img.payload[0] != lv:
                return None
            if img.payload[1] != tuple(pi(c) for c in p):
                return None
            if img.payload[2] != eps:
                flips.add((lv, p))
        sigma = RNPerm(basepart, flips)
    if any(rn_act(sigma, x) != pi(x) for x in universe):
        return None
    return sigma


def rn_support_closure(E: Iterable[Atom]) -> set:
    """Close ``E`` under tuple components and flip partners; ``Fix`` of the
    closure equals ``Fix(E)``."""
    out = set()
    todo = list(E)
    while todo:
        x = todo.pop()
        if x in out:
            continue
        out.add(x)
        if x.tag == "rn":
            level, p, eps = x.payload
            todo.extend(p)
            todo.append(rn_atom(level, p, 1 - eps))
    return out


def rn_fix_generators(universe: Sequence[Atom], E: Iterable[Atom]) -> list[Permutation]:
    """Base transpositions of free base atoms and single flips at free
    tuples; together they generate the pointwise stabiliser of ``E``."""
    closed = rn_support_closure(E)
    universe = list(universe)
    free_bases = [a for a in universe if a.tag == "base" and a not in closed]
    gens = []
    for a, b in zip(free_bases, free_bases[1:]):
        gens.append(rn_to_permutation(RNPerm({a: b, b: a}), universe))
    for level, p in sorted(rn_keys(universe), key=repr):
        if rn_atom(level, p, 0) not in closed:
            gens.append(rn_to_permutation(RNPerm({}, {(level, p)}), universe))
    return gens


def least_k(predicate, start: int = 0, limit: int = 10_000) -> int:
    for k in range(start, limit):
        if predicate(k):
            return k
    raise ValueError("no k below limit")


def least_k_iseq_over_square(support_size: int) -> int:
    """Least ``k`` with ``k! > (|E| + k)^2``."""
    return least_k(lambda k: math.factorial(k) > (support_size + k) ** 2)


def least_k_fin_over_upair(support_size: int) -> int:
    """Least ``k`` with ``2^k > C(|E| + k, 2)``."""
    return least_k(lambda k: 2**k > math.comb(support_size + k, 2))


# -- rc: cyclically ordered triples -------------------------------------------


def rc_delta(x: Atom, y: Atom) -> int:
    """Cyclic distance between two distinct atoms of one triple."""
    if x.tag != "rc" or y.tag != "rc":
        raise ValueError("rc_delta needs rc atoms")
    if x.payload[0] != y.payload[0]:
        raise ValueError(f"{x!r} and {y!r} lie in different triples")
    if x == y:
        raise ValueError("cyclic distance is defined between two distinct elements")
    return (RC_POS.index(y.payload[1]) - RC_POS.index(x.payload[1])) % 3


def rc_group_element(rotations: Mapping[int, int]) -> Permutation:
    return rc_rotation(rotations)


def _triple(x: Atom) -> int:
    return x.payload[0]


def rc_f1(s: FinSet) -> Pair:
    x, y = sorted(s, key=lambda a: (_triple(a), RC_POS.index(a.payload[1])))
    if _triple(x) < _triple(y):
        return Pair(x, y)
    (z,) = set(rc_triple(_triple(x))) - {x, y}
    return Pair(z, z)


def rc_f2(p: Pair) -> Seq:
    x, y = p.first, p.second
    return Seq((x,)) if x == y else Seq((x, y))


def _rc_f3_parts(s: Seq):
    """The E-chain, the exponents and the sigma indices of ``s``."""
    items = list(s)
    if len(set(items)) != len(items):
        raise ValueError("rc_f3 needs a repetition-free sequence")
    chosen: dict[int, Atom] = {}  # triple -> first element seen
    eps, sigma = [], []
    for i, a in enumerate(items):
        t = _triple(a)
        rep = chosen.get(t)
        eps.append(2 if rep is not None and rc_delta(rep, a) == 2 else 1)
        if rep is None:
            chosen[t] = a
        sigma.append(t if i == 0 else sigma[-1] + t + 1)
    return set(chosen.values()), eps, sigma


def rc_f3_code(s: Seq) -> int:
    """The prime-power code ``q_s``; 1 for the empty sequence."""
    _, eps, sigma = _rc_f3_parts(s)
    q = 1
    for e, k in zip(eps, sigma):
        q *= prime(k + 1) ** e
    return q


def rc_f3(s: Seq) -> FinSet:
    if len(s) == 0:
        if len(set(s)) != len(s):
            raise ValueError("rc_f3 needs a repetition-free sequence")
        return FinSet()
    chain, _, _ = _rc_f3_parts(s)
    return FinSet(chain | set(rc_triple(rc_f3_code(s))))


NOT_AN_IMAGE = None


def rc_f3_decode(F: FinSet) -> Seq | None:
    """Invert ``rc_f3``; returns ``None`` when ``F`` is not an image."""
    if any(a.tag != "rc" for a in F):
        return NOT_AN_IMAGE
    if len(F) == 0:
        return Seq()
    by_triple: dict[int, set] = {}
    for a in F:
        by_triple.setdefault(_triple(a), set()).add(a)
    full = [t for t, members in by_triple.items() if len(members) == 3]
    if len(full) != 1 or full[0] < 2:
        return NOT_AN_IMAGE
    q = full[0]
    factors = factorint(q)
    if any(e not in (1, 2) for e in factors.values()):
        return NOT_AN_IMAGE
    sig = sorted((int(primepi(p)) - 1, e) for p, e in factors.items())
    chain = {_triple(a): a for a in F if _triple(a) != q}
    if len(chain) != len(F) - 3:
        return NOT_AN_IMAGE
    out, seen_triples = [], set()
    prev = None
    for k, e in sig:
        t = k if prev is None else k - prev - 1
        prev = k
        if t not in chain:
            return NOT_AN_IMAGE
        rep = chain[t]
        if t not in seen_triples:
            if e != 1:
                return NOT_AN_IMAGE
            seen_triples.add(t)
            out.append(rep)
        else:
            cands = [a for a in rc_triple(t) if a != rep and rc_delta(rep, a) == e]
            out.append(cands[0])
    s = Seq(out)
    if len(set(out)) != len(out) or rc_f3(s) != F:
        return NOT_AN_IMAGE
    return s


# -- rz: the ordered rationals ------------------------------------------------


class TableGapError(ValueError):
    """The marker case table cannot separate an input."""


def _q(a: Atom) -> Fraction:
    return a.payload[0]


def _marker_codes(markers: Sequence[Atom]):
    m1, m2, m3, m4 = markers
    single = {m1: {m1, m2}, m2: {m1, m3}, m3: {m1, m4}, m4: {m2, m3}}
    M = set(markers)
    both = {
        (m2, m1): set(), (m3, m1): M - {m4}, (m3, m2): M - {m3},
        (m4, m1): M - {m2}, (m4, m2): M - {m1}, (m4, m3): set(M),
    }
    return single, both


def _square_to_fin(x: Atom, y: Atom, markers: Sequence[Atom]) -> FinSet:
    if _q(x) < _q(y):
        return FinSet((x, y))
    if x == y:
        return FinSet((x,))
    single, both = _marker_codes(markers)
    M = set(markers)
    outside = [a for a in (x, y) if a not in M]
    if len(outside) == 2:
        return FinSet((x, y, markers[0]))
    if len(outside) == 1:
        (u,) = outside
        (m,) = [a for a in (x, y) if a in M]
        return FinSet({u} | single[m])
    return FinSet(both[(x, y)])


def rz_square_to_fin_decode(S: FinSet, markers: Sequence[Atom]) -> Pair:
    """Recover ``<x, y>`` from an image of the ``square_to_fin`` table."""
    markers = sorted(markers, key=_q)
    single, both = _marker_codes(markers)
    M = set(markers)
    items = set(S)
    outside = items - M
    if len(items) == 1:
        (a,) = items
        return Pair(a, a)
    if len(items) == 2:
        a, b = sorted(items, key=_q)
        return Pair(a, b)
    if len(items) == 3 and len(outside) == 2:
        if items & M != {markers[0]}:
            raise TableGapError(f"unexpected marker part in {S!r}")
        a, b = sorted(outside, key=_q)
        return Pair(b, a)
    if len(items) == 3 and len(outside) == 1:
        (u,) = outside
        for m, code in single.items():
            if code == items & M:
                hi, lo = sorted((u, m), key=_q, reverse=True)
                return Pair(hi, lo)
        raise TableGapError(f"unknown marker code in {S!r}")
    if not outside:
        for pair, code in both.items():
            if code == items:
                return Pair(*pair)
    raise TableGapError(f"{S!r} is not an image of the case table")


def rz_inject(kind: str, x, markers: Sequence[Atom] = ()):
    """Order-definable injections of the ordered Mostowski model.

    ``unordered_to_square`` and ``fin_to_iseq`` have empty support;
    ``square_to_fin`` is a case table supported by four markers:
    ascending pairs go to their 2-set, diagonal pairs to a singleton, and
    descending pairs to sets of size 0, 3 or 4 built from the pair and the
    markers.
    """
    if kind == "unordered_to_square":
        a, b = sorted(x, key=_q)
        return Pair(a, b)
    if kind == "fin_to_iseq":
        return Seq(sorted(x, key=_q))
    if kind == "square_to_fin":
        if len(markers) != 4 or len(set(markers)) != 4:
            raise ValueError("square_to_fin needs four distinct markers")
        ms = sorted(markers, key=_q)
        out = _square_to_fin(x.first, x.second, ms)
        if rz_square_to_fin_decode(out, ms) != x:
            raise TableGapError(f"case table does not separate {x!r}")
        return out
    raise ValueError(f"unknown rz injection {kind!r}")


def rz_points(values: Iterable) -> list[Atom]:
    return [rz_atom(v) for v in values]


# -- counting table for the refutations ---------------------------------------


def counting_templates(support_size: int = 3) -> dict:
    """The two counting thresholds used against the rn model."""
    return {
        "iseq_over_square": least_k_iseq_over_square(support_size),
        "fin_over_upair": least_k_fin_over_upair(support_size),
    }
