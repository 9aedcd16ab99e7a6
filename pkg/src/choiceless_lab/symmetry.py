"""Permutations of atoms, group descriptions and support checks.

A :class:`Permutation` is a finite table on atoms, identity elsewhere. A
``partial`` permutation (used for the ordered rationals) is only defined on
its carrier; acting on anything else raises :class:`DomainError`.

Groups are finite truncations described by :class:`GroupSpec`. Only the
generators of pointwise stabilisers are ever materialised, except for
``Generated`` specs, whose closure is computed up to ``closure_bound``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .universe import Atom, FinSet, Pair, Seq, atoms_of, decode_atom, encode_atom, sort_key


class DomainError(ValueError):
    """An atom lies outside the domain of a partial permutation."""


class InconclusiveTruncation(Exception):
    """The finite window is too small to decide a group-level question."""


class OrbitTooLarge(Exception):
    def __init__(self, partial: set, bound: int):
        super().__init__(f"orbit exceeds {bound} elements")
        self.partial = partial
        self.bound = bound


@dataclass(frozen=True)
class Permutation:
    mapping: Mapping[Atom, Atom]
    partial: bool = False
    structure: tuple | None = None  # e.g. ("rc", ((0, 1),)), for JSON only

    def __post_init__(self):
        table = {a: b for a, b in self.mapping.items() if self.partial or a != b}
        if len(set(table.values())) != len(table):
            raise ValueError("permutation table is not injective")
        if not self.partial and set(table.values()) != set(table):
            raise ValueError("permutation table is not a bijection on its carrier")
        object.__setattr__(self, "mapping", table)

    @classmethod
    def identity(cls) -> "Permutation":
        return cls({})

    @classmethod
    def from_cycles(cls, *cycles: Sequence[Atom]) -> "Permutation":
        table = {}
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                table[a] = b
        return cls(table)

    def __call__(self, a: Atom) -> Atom:
        if self.partial:
            try:
                return self.mapping[a]
            except KeyError:
                raise DomainError(f"{a!r} is outside the partial map") from None
        return self.mapping.get(a, a)

    @property
    def carrier(self) -> frozenset:
        return frozenset(self.mapping)

    def __mul__(self, other: "Permutation") -> "Permutation":
        """``(self * other)(a) == self(other(a))``."""
        if self.partial or other.partial:
            table = {a: self(other(a)) for a in other.mapping}
            return Permutation(table, partial=True)
        atoms = self.carrier | other.carrier
        return Permutation({a: self(other(a)) for a in atoms})

    def inverse(self) -> "Permutation":
        return Permutation({b: a for a, b in self.mapping.items()}, partial=self.partial)

    def fixes(self, atoms: Iterable[Atom]) -> bool:
        return all(self(a) == a for a in atoms)

    def is_identity(self) -> bool:
        return all(a == b for a, b in self.mapping.items())

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.partial == other.partial and dict(self.mapping) == dict(other.mapping)

    def __hash__(self):
        return hash((self.partial, frozenset(self.mapping.items())))

    def __repr__(self):
        if not self.mapping:
            return "Permutation(id)"
        body = ", ".join(f"{a!r}->{b!r}" for a, b in sorted(self.mapping.items(), key=lambda kv: sort_key(kv[0])))
        return f"Permutation({body})"

    def to_json(self) -> dict:
        carrier = sorted(self.mapping, key=sort_key)
        out = {
            "carrier": [encode_atom(a) for a in carrier],
            "images": [encode_atom(self.mapping[a]) for a in carrier],
            "partial": self.partial,
        }
        if self.structure is not None:
            out["structure"] = _plain(self.structure)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Permutation":
        table = {decode_atom(a): decode_atom(b) for a, b in zip(d["carrier"], d["images"])}
        return cls(table, partial=d.get("partial", False))


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, Atom):
        return encode_atom(v)
    return v


def act(pi: Permutation, x):
    """The recursive action ``pi x = {pi y : y in x}``."""
    if isinstance(x, Atom):
        return pi(x)
    if isinstance(x, FinSet):
        return FinSet(act(pi, y) for y in x)
    if isinstance(x, Pair):
        return Pair(act(pi, x.first), act(pi, x.second))
    if isinstance(x, Seq):
        return Seq(act(pi, y) for y in x)
    if isinstance(x, dict):
        return {act(pi, k): act(pi, v) for k, v in x.items()}
    raise TypeError(f"cannot act on {x!r}")


def graph(table: Mapping) -> FinSet:
    """A function table as the set of its ``<input, output>`` pairs."""
    return FinSet(Pair(k, v) for k, v in table.items())


# -- group specifications ---------------------------------------------------

def rc_atom(n: int, pos: str) -> Atom:
    return Atom("rc", (n, pos))


RC_POS = ("a", "b", "c")


def rc_triple(n: int) -> tuple[Atom, Atom, Atom]:
    return tuple(rc_atom(n, p) for p in RC_POS)


def rc_rotation(rotations: Mapping[int, int]) -> Permutation:
    table = {}
    for n, r in rotations.items():
        r %= 3
        for i, p in enumerate(RC_POS):
            table[rc_atom(n, p)] = rc_atom(n, RC_POS[(i + r) % 3])
    struct = ("rc", tuple(sorted((n, r % 3) for n, r in rotations.items() if r % 3)))
    return Permutation(table, structure=struct)


def rz_atom(q) -> Atom:
    return Atom("rz", (Fraction(q),))


def order_relabelings(points: Sequence[Atom], pool: Sequence[Atom], fixed: Iterable[Atom] = ()) -> list[Permutation]:
    """All order-isomorphisms from ``points`` onto subsets of ``pool``
    that fix ``fixed`` pointwise, as partial permutations."""
    pts = sorted(set(points), key=lambda a: a.payload[0])
    pool = sorted(set(pool) | set(pts), key=lambda a: a.payload[0])
    fixed = set(fixed)
    out = []
    for target in itertools.combinations(pool, len(pts)):
        table = dict(zip(pts, target))
        if all(table[a] == a for a in fixed if a in table):
            out.append(Permutation(table, partial=True))
    return out


def order_preserving(pi: Permutation) -> bool:
    """A finite partial map on rationals extends to an order automorphism of
    the rationals iff it is strictly increasing (back and forth)."""
    items = sorted(pi.mapping.items(), key=lambda kv: kv[0].payload[0])
    return all(a[1].payload[0] < b[1].payload[0] for a, b in zip(items, items[1:]))


@dataclass(frozen=True)
class GroupSpec:
    """A truncated permutation group.

    kinds:
      ``free``      all permutations of ``atoms``;
      ``rc``        per-triple rotations of ``triples``;
      ``rn``        the epsilon-flip tower over ``atoms`` (an rn universe);
      ``rz``        order automorphisms of the rationals, seen through
                    relabelings of ``atoms`` into ``pool``;
      ``generated`` the closure of ``generators``.
    """

    kind: str
    atoms: tuple = ()
    triples: tuple = ()
    pool: tuple = ()
    generators: tuple = ()
    closure_bound: int = 50_000

    @classmethod
    def free(cls, atoms: Iterable[Atom]) -> "GroupSpec":
        return cls("free", atoms=tuple(atoms))

    @classmethod
    def rc(cls, triples: Iterable[int] | int) -> "GroupSpec":
        if isinstance(triples, int):
            triples = range(triples)
        triples = tuple(triples)
        return cls("rc", atoms=tuple(a for n in triples for a in rc_triple(n)), triples=triples)

    @classmethod
    def rn(cls, universe: Iterable[Atom]) -> "GroupSpec":
        return cls("rn", atoms=tuple(universe))

    @classmethod
    def rz(cls, atoms: Iterable[Atom], pool: Iterable[Atom] = ()) -> "GroupSpec":
        return cls("rz", atoms=tuple(atoms), pool=tuple(pool))

    @classmethod
    def generated(cls, generators: Iterable[Permutation], atoms: Iterable[Atom] = (), closure_bound: int = 50_000) -> "GroupSpec":
        gens = tuple(generators)
        universe = set(atoms)
        for g in gens:
            universe |= g.carrier
        return cls("generated", atoms=tuple(sorted(universe, key=sort_key)), generators=gens,
                   closure_bound=closure_bound)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "atoms": [encode_atom(a) for a in self.atoms]}
        if self.triples:
            out["triples"] = list(self.triples)
        if self.generators:
            out["generators"] = [g.to_json() for g in self.generators]
        return out

    def contains(self, pi: Permutation) -> bool:
        if self.kind == "free":
            return pi.carrier <= set(self.atoms)
        if self.kind == "rc":
            for a, b in pi.mapping.items():
                if a.tag != "rc" or b.tag != "rc" or a.payload[0] != b.payload[0]:
                    return False
            for n in {a.payload[0] for a in pi.mapping}:
                r = RC_POS.index(pi(rc_atom(n, "a")).payload[1])
                if any(pi(rc_atom(n, p)) != rc_atom(n, RC_POS[(i + r) % 3]) for i, p in enumerate(RC_POS)):
                    return False
            return True
        if self.kind == "rz":
            return order_preserving(pi)
        if self.kind == "rn":
            from .classic import rn_perm_from_permutation
            return rn_perm_from_permutation(pi, self.atoms) is not None
        if self.kind == "generated":
            return pi in set(self.elements())
        raise ValueError(self.kind)

    def elements(self) -> list[Permutation]:
        """All group elements of the truncation (small groups only)."""
        if self.kind == "rc":
            out = []
            for rots in itertools.product(range(3), repeat=len(self.triples)):
                out.append(rc_rotation(dict(zip(self.triples, rots))))
            return out
        if self.kind == "free":
            atoms = list(self.atoms)
            out = []
            for img in itertools.permutations(atoms):
                out.append(Permutation(dict(zip(atoms, img))))
                if len(out) > self.closure_bound:
                    raise InconclusiveTruncation("free group too large to enumerate")
            return out
        return closure(self.generators or (Permutation.identity(),), self.closure_bound)


def closure(generators: Iterable[Permutation], bound: int) -> list[Permutation]:
    """The group generated by ``generators``; raises when it exceeds ``bound``."""
    gens = list(generators)
    ident = Permutation.identity()
    seen = {ident}
    order = [ident]
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = s * g
            if h not in seen:
                seen.add(h)
                order.append(h)
                queue.append(h)
                if len(seen) > bound:
                    raise InconclusiveTruncation(f"group closure exceeds {bound} elements")
    return order


def _adjacent_transpositions(atoms: Sequence[Atom]) -> list[Permutation]:
    return [Permutation.from_cycles((a, b)) for a, b in zip(atoms, atoms[1:])]


def fix_generators(spec: GroupSpec, E: Iterable[Atom]) -> list[Permutation]:
    """Generators of the subgroup of ``spec`` fixing ``E`` pointwise.

    For ``rz`` the result is the list of order relabelings fixing ``E``
    (partial maps, each extendable to an automorphism of the rationals).
    """
    E = set(E)
    if spec.kind == "free":
        free = [a for a in spec.atoms if a not in E]
        gens = _adjacent_transpositions(free)
        return gens or [Permutation.identity()]
    if spec.kind == "rc":
        gens = []
        for n in spec.triples:
            if not E & set(rc_triple(n)):
                gens.append(rc_rotation({n: 1}))
        return gens or [Permutation.identity()]
    if spec.kind == "rn":
        from .classic import rn_fix_generators
        return rn_fix_generators(spec.atoms, E) or [Permutation.identity()]
    if spec.kind == "rz":
        return order_relabelings(spec.atoms, spec.pool, E)
    if spec.kind == "generated":
        return [g for g in spec.elements() if g.fixes(E)]
    raise ValueError(spec.kind)


@dataclass(frozen=True)
class SupportResult:
    outcome: str  # "supported" | "not-supported" | "inconclusive-truncation"
    witness: Permutation | None = None

    def __bool__(self):
        return self.outcome == "supported"


def is_support(E: Iterable[Atom], obj, spec: GroupSpec) -> SupportResult:
    """Whether every element of ``Fix(E)`` fixes ``obj``.

    ``obj`` may be an HF object or a function table (dict). A refutation
    carries a witness ``pi`` with ``act(pi, obj) != obj``.
    """
    E = frozenset(E)
    if isinstance(obj, dict):
        obj = graph(obj)
    if spec.kind == "rz":
        return _rz_support(E, obj)
    try:
        gens = fix_generators(spec, E)
    except InconclusiveTruncation:
        return SupportResult("inconclusive-truncation")
    for g in gens:
        if act(g, obj) != obj:
            return SupportResult("not-supported", g)
    return SupportResult("supported")


def _rz_support(E: frozenset, obj) -> SupportResult:
    atoms = atoms_of(obj)
    moving = sorted(atoms - E, key=lambda a: a.payload[0])
    if not moving:
        return SupportResult("supported")
    # shift one free atom inside its gap; the partial map is order preserving
    # hence extends to an automorphism fixing E
    known = sorted(atoms | E, key=lambda a: a.payload[0])
    a = moving[0]
    i = known.index(a)
    hi = known[i + 1].payload[0] if i + 1 < len(known) else a.payload[0] + 2
    target = rz_atom((a.payload[0] + hi) / 2)
    table = {b: b for b in known if b != a}
    table[a] = target
    pi = Permutation(table, partial=True)
    if act(pi, obj) != obj:
        return SupportResult("not-supported", pi)
    return SupportResult("inconclusive-truncation")


def orbit(x, spec: GroupSpec, E: Iterable[Atom] = (), bound: int = 100_000) -> frozenset:
    """The ``Fix(E)``-orbit of ``x`` under the truncated group."""
    gens = fix_generators(spec, E)
    if spec.kind != "rz":
        gens = gens + [g.inverse() for g in gens]
    seen = {x}
    queue = deque([x])
    while queue:
        y = queue.popleft()
        for g in gens:
            try:
                z = act(g, y)
            except DomainError:
                continue
            if z not in seen:
                seen.add(z)
                if len(seen) > bound:
                    raise OrbitTooLarge(seen, bound)
                queue.append(z)
    return frozenset(seen)
