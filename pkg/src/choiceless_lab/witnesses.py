"""Constructive extraction procedures.

* :func:`extract_from_fin_to_square` pulls an injective list of atoms out of
  an injection ``fin(A) -> A^2``.
* :func:`finite_to_one_seq_to_fin` is the finite-to-one map
  ``seq(A) -> fin(A)`` built from such a list.
* :func:`extract_from_pair_maps` pulls atoms out of a pair of injections
  ``A^2 -> [A]^2`` and ``fin(A) -> seq^{1-1}(A)``.

The procedures talk to :class:`InjectionOracle` objects. An oracle answers
queries lazily over an atom supply that grows on demand, so a run only ever
touches finitely many atoms.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .universe import (
    Atom, FinSet, Kind, Pair, Seq, atoms_of, base, decode, encode, enum_kind,
    first_occurrence, fresh, is_kind, seq_code, seq_decode, sort_key,
)


class OracleError(Exception):
    """An oracle gave the same answer to two different queries."""

    def __init__(self, message: str, inputs: tuple = (), answer=None):
        super().__init__(message)
        self.inputs = inputs
        self.answer = answer


class InvariantViolation(Exception):
    """A procedure could not make progress; carries the round table."""

    def __init__(self, message: str, trace: "ExtractionTrace | None" = None):
        super().__init__(message)
        self.trace = trace


class AtomSupply:
    """Hands out ``base(0), base(1), ...`` in order."""

    def __init__(self, start: int = 0):
        self.next_id = start

    def take(self) -> Atom:
        a = base(self.next_id)
        self.next_id += 1
        return a


class InjectionOracle:
    """A memoised map between two kinds, checked for injectivity as it goes.

    ``answer`` produces a candidate image for a query that has not been seen
    before. Table oracles look the query up; random oracles draw an unused
    value over the atoms minted so far, minting new atoms at ``fresh_rate``.
    """

    def __init__(self, domain: Kind, codomain: Kind, answer: Callable, name: str = "oracle",
                 seed: int | None = None):
        self.domain = domain
        self.codomain = codomain
        self._answer = answer
        self.name = name
        self.seed = seed
        self.memo: dict = {}
        self.reverse: dict = {}

    def __call__(self, x):
        if x in self.memo:
            return self.memo[x]
        if not is_kind(x, self.domain):
            raise ValueError(f"{self.name}: {x!r} is not a {self.domain.value} object")
        y = self._answer(x, self)
        if not is_kind(y, self.codomain):
            raise OracleError(f"{self.name}: answer {y!r} is not a {self.codomain.value} object", (x,), y)
        if y in self.reverse:
            other = self.reverse[y]
            raise OracleError(f"{self.name} maps {other!r} and {x!r} to {y!r}", (other, x), y)
        self.memo[x] = y
        self.reverse[y] = x
        return y

    def used(self, y) -> bool:
        return y in self.reverse

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_table(cls, domain: Kind, codomain: Kind, table: Mapping, name: str = "table") -> "InjectionOracle":
        table = dict(table)

        def answer(x, _oracle):
            try:
                return table[x]
            except KeyError:
                raise OracleError(f"{name}: no entry for {x!r}", (x,)) from None

        return cls(domain, codomain, answer, name)

    @classmethod
    def from_function(cls, domain: Kind, codomain: Kind, fn: Callable, name: str = "function") -> "InjectionOracle":
        return cls(domain, codomain, lambda x, _o: fn(x), name)

    @classmethod
    def random(cls, domain: Kind, codomain: Kind, seed: int, supply: AtomSupply | None = None,
               fresh_rate: float = 0.5, max_len: int = 3, name: str = "random") -> "InjectionOracle":
        """A seeded random injection; every draw is reproducible from ``seed``.

        Values are drawn over the atoms this oracle (or a shared ``supply``)
        has seen so far; with probability ``fresh_rate`` a component is a
        newly minted atom. When no unused value turns up after a few tries a
        fresh atom is forced, so the oracle is total.
        """
        rng = random.Random(seed)
        supply = supply if supply is not None else AtomSupply()
        pool: list[Atom] = []

        def pick() -> Atom:
            if not pool or rng.random() < fresh_rate:
                a = supply.take()
                pool.append(a)
                return a
            return rng.choice(pool)

        def draw():
            if codomain is Kind.OPAIR:
                return Pair(pick(), pick())
            if codomain is Kind.FIN:
                return FinSet(pick() for _ in range(rng.randint(0, max_len)))
            if codomain is Kind.ISEQ:
                n = rng.randint(0, max_len)
                out: list[Atom] = []
                while len(out) < n:
                    a = pick()
                    if a not in out:
                        out.append(a)
                return Seq(out)
            if codomain is Kind.SEQ:
                return Seq(pick() for _ in range(rng.randint(0, max_len)))
            raise ValueError(codomain)

        # 2-sets are drawn from an explicit list of unused candidates, so a
        # saturated pool costs nothing and fresh atoms appear only when forced
        # or chosen at ``fresh_rate``
        unused: list = []
        unused_pos: dict = {}

        in_pool: set = set()

        def admit(a: Atom):
            if a in in_pool:
                return
            in_pool.add(a)
            for b in pool:
                pair = FinSet((a, b))
                unused_pos[pair] = len(unused)
                unused.append(pair)
            pool.append(a)

        def take_unused(i: int):
            pair = unused[i]
            last = unused.pop()
            if last != pair:
                unused[i] = last
                unused_pos[last] = i
            del unused_pos[pair]
            return pair

        def answer(x, oracle):
            if codomain is Kind.UPAIR:
                for a in sorted(atoms_of(x), key=sort_key):
                    admit(a)
                if not unused or rng.random() < fresh_rate:
                    admit(supply.take())
                    if not unused:
                        admit(supply.take())
                while True:
                    y = take_unused(rng.randrange(len(unused)))
                    if not oracle.used(y):
                        return y
                    if not unused:
                        admit(supply.take())
            for a in sorted(atoms_of(x), key=sort_key):
                if a not in pool:
                    pool.append(a)
            for _ in range(8):
                y = draw()
                if not oracle.used(y):
                    return y
            # forced fresh value
            while True:
                a = supply.take()
                pool.append(a)
                y = {Kind.OPAIR: Pair(a, a), Kind.FIN: FinSet((a,)), Kind.ISEQ: Seq((a,)),
                     Kind.SEQ: Seq((a,))}[codomain]
                if not oracle.used(y):
                    return y

        return cls(domain, codomain, answer, name, seed)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "domain": self.domain.value,
            "codomain": self.codomain.value,
            "seed": self.seed,
            "table": [[encode(k), encode(v)] for k, v in self.memo.items()],
        }

    @classmethod
    def from_json(cls, d: dict) -> "InjectionOracle":
        table = {decode(k): decode(v) for k, v in d["table"]}
        return cls.from_table(Kind(d["domain"]), Kind(d["codomain"]), table, d.get("name", "table"))


# -- traces -------------------------------------------------------------------


@dataclass
class TraceRow:
    known: tuple
    probe: object
    answer: object
    found: Atom | None

    def to_json(self) -> dict:
        return {
            "known": [encode(a) for a in self.known],
            "probe": encode(self.probe),
            "answer": encode(self.answer),
            "found": None if self.found is None else encode(self.found),
        }


@dataclass
class ExtractionTrace:
    procedure: str
    rows: list = field(default_factory=list)
    seed_atoms: tuple = ()
    oracle_seed: int | None = None
    extra: dict = field(default_factory=dict)

    def found(self) -> list:
        return [r.found for r in self.rows if r.found is not None]

    def memo(self) -> dict:
        return {r.probe: r.answer for r in self.rows}

    def to_json(self) -> dict:
        """Rows sharing a known-atom list are grouped into one round."""
        rounds: list = []
        for r in self.rows:
            if not rounds or rounds[-1][0] != r.known:
                rounds.append((r.known, []))
            row = r.to_json()
            del row["known"]
            rounds[-1][1].append(row)
        return {
            "procedure": self.procedure,
            "seed_atoms": [encode(a) for a in self.seed_atoms],
            "oracle_seed": self.oracle_seed,
            "rounds": [{"known": [encode(a) for a in known], "queries": rows} for known, rows in rounds],
            **self.extra,
        }


# -- fin -> square ------------------------------------------------------------


def extract_from_fin_to_square(h: InjectionOracle, seed: Sequence[Atom], n: int):
    """Extend five distinct atoms to ``n`` distinct atoms using ``h``.

    Round ``k`` scans ``fin`` of the ``k`` known atoms in the canonical order
    of :func:`enum_kind` and stops at the first set whose image has a
    component outside the known atoms; that component (the first one, if
    both qualify) becomes the next atom. Since ``2^k > k^2`` for ``k >= 5``,
    an injective ``h`` always offers such a set among the first ``k^2 + 1``.
    """
    seed = list(seed)
    if len(seed) != 5 or len(set(seed)) != 5:
        raise ValueError("seed must be five distinct atoms")
    if n < 5:
        raise ValueError("n must be at least 5")
    known = list(seed)
    trace = ExtractionTrace("lemma-n", seed_atoms=tuple(seed), oracle_seed=h.seed)
    while len(known) < n:
        known_set = set(known)
        snapshot = tuple(known)
        for u in enum_kind(Kind.FIN, known):
            x, y = h(u)
            fresh_part = [a for a in (x, y) if a not in known_set]
            new = fresh_part[0] if fresh_part else None
            trace.rows.append(TraceRow(snapshot, u, Pair(x, y), new))
            if new is not None:
                known.append(new)
                break
        else:
            raise InvariantViolation(f"no set over {len(known)} atoms has a new atom in its image", trace)
    return known, trace


def replay_fin_to_square(trace: ExtractionTrace, n: int | None = None) -> bool:
    """Rerun the extraction against the recorded answers only."""
    oracle = InjectionOracle.from_table(Kind.FIN, Kind.OPAIR, trace.memo(), "replay")
    n = n if n is not None else len(trace.seed_atoms) + len(trace.found())
    try:
        atoms, again = extract_from_fin_to_square(oracle, trace.seed_atoms, n)
    except (OracleError, InvariantViolation):
        return False
    return again.rows == trace.rows and atoms == list(trace.seed_atoms) + trace.found()


# -- the finite-to-one map ------------------------------------------------------


class Embedding:
    """An injective list ``x_0, x_1, ...``; missing entries are minted fresh."""

    def __init__(self, prefix: Iterable[Atom] = (), label: str = "x"):
        self.xs: list[Atom] = list(prefix)
        if len(set(self.xs)) != len(self.xs):
            raise ValueError("embedding must be injective")
        self.label = label
        self.index = {a: i for i, a in enumerate(self.xs)}

    def x(self, i: int) -> Atom:
        while len(self.xs) <= i:
            a = fresh(0, "embed", len(self.xs), self.label)
            self.index[a] = len(self.xs)
            self.xs.append(a)
        return self.xs[i]

    def iota(self, a: Atom) -> Atom:
        i = self.index.get(a)
        return a if i is None else self.x(2 * i + 1)

    def iota_inverse(self, a: Atom) -> Atom:
        i = self.index.get(a)
        if i is None:
            return a
        if i % 2 == 0:
            raise ValueError(f"{a!r} is not in the image of iota")
        return self.xs[(i - 1) // 2]


def finite_to_one_seq_to_fin(embed: Embedding | Sequence[Atom], s: Seq) -> FinSet:
    """``ran(iota o s)`` plus the marker ``x_{2 i}`` with ``i = seq_code(iota o s)``."""
    emb = embed if isinstance(embed, Embedding) else Embedding(embed)
    t = [emb.iota(a) for a in s]
    marker = emb.x(2 * seq_code(t))
    return FinSet(set(t) | {marker})


def fiber(embed: Embedding, F: FinSet) -> list[Seq]:
    """All sequences mapped to ``F``, found by decoding rather than search.

    The marker is the unique even-indexed atom of ``F``; the remaining atoms
    are the range. Every ordering of the range is tried as the
    first-occurrence enumeration of a decoded sequence.
    """
    markers = [a for a in F if a in embed.index and embed.index[a] % 2 == 0]
    if len(markers) != 1:
        return []
    (m,) = markers
    code, rest = embed.index[m] // 2, [a for a in F if a != m]
    out = set()
    for order in itertools.permutations(rest):
        try:
            t = seq_decode(code, order)
        except ValueError:
            continue
        if first_occurrence(t) != list(order):
            continue
        try:
            out.add(Seq(embed.iota_inverse(a) for a in t))
        except ValueError:
            continue
    return sorted(out, key=lambda s: sort_key(s))


# -- the pair of maps ------------------------------------------------------------


def extract_from_pair_maps(f: InjectionOracle, g: InjectionOracle, a0: Atom, n: int,
                           rounds: int = 1, max_rounds: int = 64):
    """Distinct atoms from ``f: A^2 -> [A]^2`` and ``g: fin(A) -> seq^{1-1}(A)``.

    ``E_0 = {a0}``; ``E_{m+1}`` is the set of atoms of ``f``-images of pairs
    over the union so far, minus that union. The sequences ``g(E_m)`` are
    concatenated and read off left to right, keeping first appearances.
    At least ``rounds`` rounds run; more run until ``n`` atoms are found.
    """
    if n < 1:
        raise ValueError("n must be positive")
    trace = ExtractionTrace("lemma-c", seed_atoms=(a0,), oracle_seed=f.seed)
    E_sets = [FinSet((a0,))]
    union = [a0]
    union_set = {a0}
    out: list[Atom] = []
    seen: set = set()
    sequences = []

    def read(E):
        S = g(E)
        sequences.append(S)
        for a in S:
            if a not in seen:
                seen.add(a)
                out.append(a)
        trace.rows.append(TraceRow(tuple(union), E, S, None))

    read(E_sets[0])
    m = 0
    while m < rounds or len(out) < n:
        if m >= max_rounds:
            raise InvariantViolation(f"only {len(out)} atoms after {m} rounds", trace)
        snapshot = tuple(union)
        new: list[Atom] = []
        for a, b in itertools.product(union, repeat=2):
            image = f(Pair(a, b))
            trace.rows.append(TraceRow(snapshot, Pair(a, b), image, None))
            for c in sorted(image, key=sort_key):
                if c not in union_set and c not in new:
                    new.append(c)
        if not new:
            raise InvariantViolation(f"E_{m + 1} is empty", trace)
        E = FinSet(new)
        E_sets.append(E)
        union.extend(new)
        union_set.update(new)
        read(E)
        m += 1
    trace.extra["E_sets"] = [encode(E) for E in E_sets]
    return out[:n], trace, E_sets
