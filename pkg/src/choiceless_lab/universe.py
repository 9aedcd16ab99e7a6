"""Atoms, hereditarily finite objects and the five kinds of finite objects.

Objects are immutable and hashable. ``Atom`` doubles as the atom case of an
HF object; ``FinSet``, ``Pair`` and ``Seq`` cover the rest.

Canonical enumeration order (used wherever a "first" object is needed):

* sets: by size, then colexicographic on ground positions
  (for a 2-set ground ``a, b, c``: ``{a,b}, {a,c}, {b,c}``);
* pairs and sequences: by length, then lexicographic on ground positions.
"""

from __future__ import annotations

import enum
import functools
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

ATOM_TAGS = ("base", "rn", "rc", "rz", "fresh")


@dataclass(frozen=True, slots=True)
class Atom:
    """An urelement. Equality is structural on ``(tag, payload)``."""

    tag: str
    payload: tuple

    def __post_init__(self):
        if self.tag not in ATOM_TAGS:
            raise ValueError(f"unknown atom tag {self.tag!r}")
        if not isinstance(self.payload, tuple):
            raise TypeError("atom payload must be a tuple")

    def __repr__(self):
        if self.tag == "base":
            return f"@{self.payload[0]}"
        if self.tag == "rc":
            return f"{self.payload[1]}{self.payload[0]}"
        if self.tag == "rz":
            return f"q{self.payload[0]}"
        if self.tag == "rn":
            level, p, eps = self.payload
            return f"({level},{list(p)},{eps})"
        stage, reason, key, role = self.payload
        return f"<{reason}{stage}:{role}>"


@dataclass(frozen=True, slots=True)
class FinSet:
    items: frozenset

    def __init__(self, items: Iterable = ()):
        object.__setattr__(self, "items", frozenset(items))

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __contains__(self, x):
        return x in self.items

    def __repr__(self):
        return "{" + ", ".join(sorted(map(repr, self.items))) + "}"


@dataclass(frozen=True, slots=True)
class Pair:
    first: "HF"
    second: "HF"

    def __iter__(self):
        yield self.first
        yield self.second

    def __repr__(self):
        return f"<{self.first!r}, {self.second!r}>"


@dataclass(frozen=True, slots=True)
class Seq:
    items: tuple

    def __init__(self, items: Iterable = ()):
        object.__setattr__(self, "items", tuple(items))

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __repr__(self):
        return "<<" + ", ".join(map(repr, self.items)) + ">>"


HF = Union[Atom, FinSet, Pair, Seq]
EMPTY = FinSet()


def base(i: int) -> Atom:
    return Atom("base", (i,))


def fresh(stage: int, reason: str, key, role) -> Atom:
    """A fresh atom; ``key`` is the object whose fulfilment created it."""
    return Atom("fresh", (stage, reason, key, role))


class Kind(enum.Enum):
    FIN = "fin"  # finite subsets
    OPAIR = "opair"  # ordered pairs
    UPAIR = "upair"  # 2-element subsets
    ISEQ = "iseq"  # repetition-free sequences
    SEQ = "seq"  # sequences, repetitions allowed

    @classmethod
    def parse(cls, name: str) -> "Kind":
        aliases = {
            "fin": cls.FIN, "finsubsets": cls.FIN,
            "opair": cls.OPAIR, "orderedpairs": cls.OPAIR, "square": cls.OPAIR,
            "upair": cls.UPAIR, "unorderedpairs": cls.UPAIR,
            "iseq": cls.ISEQ, "injseq": cls.ISEQ,
            "seq": cls.SEQ,
        }
        try:
            return aliases[name.lower().replace("_", "").replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown kind {name!r}") from None


def atoms_of(x) -> frozenset:
    """All atoms in the transitive closure of ``x``."""
    if isinstance(x, Atom):
        return frozenset((x,))
    if isinstance(x, (FinSet, Seq)):
        return frozenset().union(*(atoms_of(y) for y in x))
    if isinstance(x, Pair):
        return atoms_of(x.first) | atoms_of(x.second)
    raise TypeError(f"not an HF object: {x!r}")


def depth(x) -> int:
    if isinstance(x, Atom):
        return 0
    if isinstance(x, Pair):
        return 1 + max(depth(x.first), depth(x.second))
    return 1 + max((depth(y) for y in x), default=0)


def is_kind(x, kind: Kind) -> bool:
    """Membership of ``x`` in the kind over an arbitrary atom set."""
    if kind is Kind.FIN:
        return isinstance(x, FinSet) and all(isinstance(a, Atom) for a in x)
    if kind is Kind.UPAIR:
        return is_kind(x, Kind.FIN) and len(x) == 2
    if kind is Kind.OPAIR:
        return isinstance(x, Pair) and isinstance(x.first, Atom) and isinstance(x.second, Atom)
    if kind is Kind.SEQ:
        return isinstance(x, Seq) and all(isinstance(a, Atom) for a in x)
    if kind is Kind.ISEQ:
        return is_kind(x, Kind.SEQ) and len(set(x)) == len(x)
    raise ValueError(kind)


# -- counting ---------------------------------------------------------------

def count_kind(kind: Kind, k: int, maxlen: int | None = None) -> int:
    """Exact number of ``kind`` objects over a ``k``-element ground set."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if kind is Kind.SEQ:
        if maxlen is None:
            raise ValueError("maxlen is required for Kind.SEQ")
        return sum(k**n for n in range(maxlen + 1))
    if maxlen is not None:
        raise ValueError(f"maxlen only applies to Kind.SEQ, not {kind}")
    if kind is Kind.FIN:
        return 2**k
    if kind is Kind.OPAIR:
        return k * k
    if kind is Kind.UPAIR:
        return math.comb(k, 2)
    if kind is Kind.ISEQ:
        return sum(math.perm(k, n) for n in range(k + 1))
    raise ValueError(kind)


# -- enumeration ------------------------------------------------------------

def _colex_combinations(n: int, size: int):
    """Lazily yield ``size``-subsets of ``range(n)`` in colex order."""
    if size == 0:
        yield ()
        return
    for top in range(size - 1, n):
        for rest in _colex_combinations(top, size - 1):
            yield rest + (top,)


def enum_kind(kind: Kind, ground: Sequence[Atom], maxlen: int | None = None) -> Iterator[HF]:
    """Every ``kind`` object over ``ground`` exactly once, in canonical order."""
    ground = list(ground)
    if len(set(ground)) != len(ground):
        raise ValueError("ground atoms must be distinct")
    n = len(ground)
    if kind is Kind.SEQ and maxlen is None:
        raise ValueError("maxlen is required for Kind.SEQ")
    if kind is Kind.FIN:
        for size in range(n + 1):
            for c in _colex_combinations(n, size):
                yield FinSet(ground[i] for i in c)
    elif kind is Kind.UPAIR:
        for c in _colex_combinations(n, 2):
            yield FinSet(ground[i] for i in c)
    elif kind is Kind.OPAIR:
        for i, j in itertools.product(range(n), repeat=2):
            yield Pair(ground[i], ground[j])
    elif kind is Kind.ISEQ:
        top = n if maxlen is None else min(n, maxlen)
        for length in range(top + 1):
            for p in itertools.permutations(range(n), length):
                yield Seq(ground[i] for i in p)
    elif kind is Kind.SEQ:
        for length in range(maxlen + 1):
            for p in itertools.product(range(n), repeat=length):
                yield Seq(ground[i] for i in p)
    else:
        raise ValueError(kind)


# -- lowering to pure sets --------------------------------------------------

def kuratowski(x, y) -> FinSet:
    return FinSet((FinSet((x,)), FinSet((x, y))))


def lower_to_sets(x):
    """Rewrite pairs and sequences as pure sets.

    ``Pair(x, y)`` becomes ``{{x}, {x, y}}``; ``Seq`` becomes right-nested
    pairs terminated by the empty set. Injective within each constructor.
    """
    if isinstance(x, Atom):
        return x
    if isinstance(x, FinSet):
        return FinSet(lower_to_sets(y) for y in x)
    if isinstance(x, Pair):
        return kuratowski(lower_to_sets(x.first), lower_to_sets(x.second))
    if isinstance(x, Seq):
        out = EMPTY
        for y in reversed(x.items):
            out = kuratowski(lower_to_sets(y), out)
        return out
    raise TypeError(f"not an HF object: {x!r}")


# -- sequence coding --------------------------------------------------------

def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def first_occurrence(s: Iterable) -> list:
    seen = {}
    for a in s:
        seen.setdefault(a, None)
    return list(seen)


def seq_code(s, enumeration: Sequence | None = None) -> int:
    """Code a finite sequence by a natural number.

    Each entry is replaced by its position in ``enumeration`` (default: the
    range of ``s`` in order of first occurrence); the digit string is read in
    base ``len(enumeration)`` and paired with the length. With the default
    enumeration the code only sees the repetition pattern of ``s``; with a
    fixed enumeration it is injective on sequences over that enumeration.
    """
    items = list(s)
    r = first_occurrence(items) if enumeration is None else list(enumeration)
    index = {a: i for i, a in enumerate(r)}
    n = len(r)
    value = 0
    for a in items:
        try:
            value = value * n + index[a]
        except KeyError:
            raise ValueError(f"{a!r} is not in the enumeration") from None
    return cantor_pair(len(items), value)


def seq_decode(code: int, enumeration: Sequence) -> tuple:
    """Inverse of :func:`seq_code` for a fixed enumeration.

    Raises ``ValueError`` when ``code`` does not come from a sequence over it.
    """
    length, value = cantor_unpair(code)
    n = len(enumeration)
    if n == 0:
        if length or value:
            raise ValueError("code needs a non-empty enumeration")
        return ()
    digits = []
    for _ in range(length):
        value, d = divmod(value, n)
        digits.append(d)
    if value:
        raise ValueError("code too large for this enumeration")
    return tuple(enumeration[d] for d in reversed(digits))


# -- canonical JSON ---------------------------------------------------------

def _encode_value(v):
    if isinstance(v, (Atom, FinSet, Pair, Seq)):
        return {"hf": encode(v)}
    if isinstance(v, Fraction):
        return {"q": f"{v.numerator}/{v.denominator}"}
    if isinstance(v, tuple):
        return [_encode_value(y) for y in v]
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    raise TypeError(f"cannot encode payload value {v!r}")


def _decode_value(v):
    if isinstance(v, dict):
        if "hf" in v:
            return decode(v["hf"])
        if "q" in v:
            return Fraction(v["q"])
        raise ValueError(f"bad payload value {v!r}")
    if isinstance(v, list):
        return tuple(_decode_value(y) for y in v)
    return v


def encode_atom(a: Atom) -> dict:
    if a.tag == "rc":
        n, pos = a.payload
        payload = {"triple": n, "pos": pos}
    elif a.tag == "rz":
        q = a.payload[0]
        payload = f"{q.numerator}/{q.denominator}"
    else:
        payload = _encode_value(a.payload)
    return {"tag": a.tag, "payload": payload}


def decode_atom(d: dict) -> Atom:
    tag, payload = d["tag"], d["payload"]
    if tag == "rc":
        return Atom("rc", (payload["triple"], payload["pos"]))
    if tag == "rz":
        return Atom("rz", (Fraction(payload),))
    return Atom(tag, _decode_value(payload))


@functools.lru_cache(maxsize=1 << 16)
def sort_key(x) -> str:
    """Total order on HF objects: compare canonical JSON text."""
    return json.dumps(encode(x), sort_keys=True, separators=(",", ":"))


def encode(x):
    """Canonical JSON form.

    Atoms are ``{"tag", "payload"}`` objects, sets are arrays sorted by
    :func:`sort_key`, pairs are ``["pair", x, y]`` and sequences
    ``["seq", ...]``.
    """
    if isinstance(x, Atom):
        return encode_atom(x)
    if isinstance(x, FinSet):
        encs = [encode(y) for y in x]
        return sorted(encs, key=lambda e: json.dumps(e, sort_keys=True, separators=(",", ":")))
    if isinstance(x, Pair):
        return ["pair", encode(x.first), encode(x.second)]
    if isinstance(x, Seq):
        return ["seq", *(encode(y) for y in x)]
    raise TypeError(f"not an HF object: {x!r}")


def decode(e):
    if isinstance(e, dict):
        return decode_atom(e)
    if isinstance(e, list):
        if e and e[0] == "pair":
            return Pair(decode(e[1]), decode(e[2]))
        if e and e[0] == "seq":
            return Seq(decode(y) for y in e[1:])
        return FinSet(decode(y) for y in e)
    raise ValueError(f"bad HF encoding {e!r}")


def sorted_objects(xs: Iterable) -> list:
    return sorted(xs, key=sort_key)


# -- resource limits --------------------------------------------------------

DEFAULT_MAX_ATOMS = 200_000


class ResourceLimit(Exception):
    """A universe or model would exceed the configured atom cap."""

    def __init__(self, message: str, size: int | None = None, partial=None):
        super().__init__(message)
        self.size = size
        self.partial = partial


def max_atoms() -> int:
    """Atom cap, overridable through ``CHOICELESS_LAB_MAX_ATOMS``."""
    import os

    raw = os.environ.get("CHOICELESS_LAB_MAX_ATOMS")
    return int(raw) if raw else DEFAULT_MAX_ATOMS
