"""Finite truncations of the two amalgamation classes.

``ModelN`` carries one partial injection ``h: fin(A) -> A^2``; ``ModelZ``
carries ``f: A^2 -> [A]^2``, ``g: [A]^2 -> seq^{1-1}(A)`` and
``h: seq^{1-1}(A) -> fin(A)``. Every construction here runs finitely many
rounds and leaves the unfulfilled inputs on an explicit frontier.

Fresh atoms are named ``fresh(stage, reason, key, role)`` where ``key`` is
the input whose fulfilment created them. Disjointness of fresh blocks is
therefore automatic, and a permutation of the older atoms extends to the
fresh ones by acting on keys (:func:`extend_by_keys`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .symmetry import Permutation, act
from .universe import (
    EMPTY, Atom, FinSet, Kind, Pair, Seq, atoms_of, base, decode, encode,
    encode_atom, decode_atom, enum_kind, fresh, sort_key,
)


class AmalgamationError(ValueError):
    """Two models disagree on a shared input, or their images collide."""


class Model:
    """A finite set of atoms with partial injective maps.

    ``max_set_size`` and ``max_len`` truncate the inputs that count as
    expressible: finite sets larger than ``max_set_size`` and sequences
    longer than ``max_len`` never enter the frontier.
    """

    CLASS = "?"
    MAPS: dict = {}

    def __init__(self, atoms: Iterable[Atom] = (), maps: Mapping | None = None,
                 max_set_size: int | None = None, max_len: int | None = None):
        self.atoms = set(atoms)
        self.maps = {name: {} for name in self.MAPS}
        for name, table in (maps or {}).items():
            if name not in self.MAPS:
                raise ValueError(f"{self.CLASS} models have no map {name!r}")
            self.maps[name] = dict(table)
        self.max_set_size = max_set_size
        self.max_len = max_len

    def copy(self) -> "Model":
        return type(self)(self.atoms, self.maps, self.max_set_size, self.max_len)

    def __eq__(self, other):
        return (type(self) is type(other) and self.atoms == other.atoms and self.maps == other.maps
                and self.max_set_size == other.max_set_size and self.max_len == other.max_len)

    def __len__(self):
        return len(self.atoms)

    def sorted_atoms(self) -> list[Atom]:
        return sorted(self.atoms, key=sort_key)

    def inputs(self, name: str, atoms: Iterable[Atom] | None = None) -> Iterator:
        """Expressible inputs of map ``name`` over ``atoms`` (default: all)."""
        kind = self.MAPS[name][0]
        ground = self.sorted_atoms() if atoms is None else sorted(atoms, key=sort_key)
        if kind is Kind.FIN:
            for E in enum_kind(Kind.FIN, ground):
                if self.max_set_size is not None and len(E) > self.max_set_size:
                    return
                yield E
        elif kind is Kind.ISEQ:
            yield from enum_kind(Kind.ISEQ, ground, self.max_len)
        else:
            yield from enum_kind(kind, ground)

    def frontier(self, name: str) -> Iterator:
        table = self.maps[name]
        return (x for x in self.inputs(name) if x not in table)

    def frontier_size(self) -> int:
        return sum(1 for name in self.MAPS for _ in self.frontier(name))

    def violations(self) -> list:
        """Injectivity and well-formedness faults, as ``(map, detail)``."""
        out = []
        for name, table in self.maps.items():
            seen = {}
            for x, y in table.items():
                if not atoms_of(x) <= self.atoms or not atoms_of(y) <= self.atoms:
                    out.append((name, ("outside-atoms", x, y)))
                if y in seen:
                    out.append((name, ("collision", seen[y], x, y)))
                seen[y] = x
        return out

    def is_injective(self) -> bool:
        return not any(v[1][0] == "collision" for v in self.violations())

    def to_json(self, frontier_limit: int = 0) -> dict:
        out = {
            "class": self.CLASS,
            "atoms": [encode_atom(a) for a in self.sorted_atoms()],
            "maps": {
                name: sorted(([encode(x), encode(y)] for x, y in table.items()), key=lambda r: sort_key(decode(r[0])))
                for name, table in self.maps.items()
            },
            "truncation": {"max_set_size": self.max_set_size, "max_len": self.max_len},
        }
        if frontier_limit:
            front = {}
            for name in self.MAPS:
                items = list(itertools.islice(self.frontier(name), frontier_limit + 1))
                front[name] = None if len(items) > frontier_limit else [encode(x) for x in items]
            out["frontier"] = front
        return out

    @staticmethod
    def from_json(d: dict) -> "Model":
        cls = {"N": ModelN, "Z": ModelZ}[d["class"]]
        maps = {name: {decode(x): decode(y) for x, y in rows} for name, rows in d["maps"].items()}
        trunc = d.get("truncation", {})
        return cls((decode_atom(a) for a in d["atoms"]), maps, trunc.get("max_set_size"), trunc.get("max_len"))


class ModelN(Model):
    CLASS = "N"
    MAPS = {"h": (Kind.FIN, Kind.OPAIR)}

    @property
    def h(self) -> dict:
        return self.maps["h"]


class ModelZ(Model):
    CLASS = "Z"
    MAPS = {"f": (Kind.OPAIR, Kind.UPAIR), "g": (Kind.UPAIR, Kind.ISEQ), "h": (Kind.ISEQ, Kind.FIN)}

    @property
    def f(self) -> dict:
        return self.maps["f"]

    @property
    def g(self) -> dict:
        return self.maps["g"]

    @property
    def h(self) -> dict:
        return self.maps["h"]


# -- the strong order -----------------------------------------------------------


@dataclass(frozen=True)
class LeqResult:
    holds: bool
    witness: tuple | None = None  # (map name | "atoms", input, output)

    def __bool__(self):
        return self.holds


def leq(M1: Model, M2: Model) -> LeqResult:
    """``M1 <= M2``: inclusion of atoms and maps, and inputs not over
    ``M1`` are sent to objects over ``M2 \\ M1``."""
    missing = M1.atoms - M2.atoms
    if missing:
        return LeqResult(False, ("atoms", min(missing, key=sort_key), None))
    new = M2.atoms - M1.atoms
    for name in M2.MAPS:
        small, big = M1.maps.get(name, {}), M2.maps[name]
        for x in sorted(small, key=sort_key):
            if big.get(x) != small[x]:
                return LeqResult(False, (name, x, big.get(x)))
        for x in sorted(big, key=sort_key):
            if atoms_of(x) <= M1.atoms:
                continue
            if not atoms_of(big[x]) <= new:
                return LeqResult(False, (name, x, big[x]))
    return LeqResult(True)


def leq_n(M1: ModelN, M2: ModelN) -> LeqResult:
    return leq(M1, M2)


def leq_z(M1: ModelZ, M2: ModelZ) -> LeqResult:
    return leq(M1, M2)


def restrict(M: Model, atoms: Iterable[Atom]) -> Model:
    """The submodel on ``atoms``: every map entry whose input lies over them."""
    atoms = set(atoms)
    maps = {name: {x: y for x, y in table.items() if atoms_of(x) <= atoms} for name, table in M.maps.items()}
    return type(M)(atoms, maps, M.max_set_size, M.max_len)


# -- automorphisms ----------------------------------------------------------------


def _map_key(key, img):
    if isinstance(key, Atom):
        return img(key)
    if isinstance(key, FinSet):
        return FinSet(_map_key(k, img) for k in key)
    if isinstance(key, Pair):
        return Pair(_map_key(key.first, img), _map_key(key.second, img))
    if isinstance(key, Seq):
        return Seq(_map_key(k, img) for k in key)
    if isinstance(key, tuple):
        return tuple(_map_key(k, img) for k in key)
    return key


def extend_by_keys(base_map: Mapping[Atom, Atom], atoms: Iterable[Atom],
                   reasons: Iterable[str] | None = None) -> Permutation | None:
    """Extend ``base_map`` to ``atoms``: a fresh atom goes to the fresh atom
    with the same stage, reason and role whose key is the image of its key.

    Atoms neither in ``base_map`` nor fresh (for one of ``reasons``) are
    fixed. Returns ``None`` when the result is not a permutation of ``atoms``.
    """
    atoms = set(atoms)
    reasons = None if reasons is None else set(reasons)
    memo: dict = dict(base_map)

    def img(a: Atom) -> Atom:
        if a in memo:
            return memo[a]
        if a.tag == "fresh" and (reasons is None or a.payload[1] in reasons):
            stage, reason, key, role = a.payload
            b = fresh(stage, reason, _map_key(key, img), role)
        else:
            b = a
        memo[a] = b
        return b

    table = {a: img(a) for a in atoms}
    if set(table.values()) != atoms:
        return None
    return Permutation(table)


def is_automorphism(M: Model, pi: Permutation) -> tuple[bool, tuple | None]:
    """Whether ``pi`` maps every map graph of ``M`` onto itself.

    On failure the witness is ``(map, input, expected, found)``.
    """
    if {pi(a) for a in M.atoms} != M.atoms:
        return False, ("atoms", None, None, None)
    for name, table in M.maps.items():
        for x in sorted(table, key=sort_key):
            px = act(pi, x)
            expected = act(pi, table[x])
            if table.get(px) != expected:
                return False, (name, x, expected, table.get(px))
    return True, None


# -- closure ------------------------------------------------------------------------


def closure(A0: Iterable[Atom], M: Model) -> frozenset:
    """The least superset of ``A0`` closed under the maps and their preimages.

    Only fulfilled entries contribute: an entry whose input lies in the
    current set adds the atoms of its output, and an entry whose output lies
    in the current set adds the atoms of its input.
    """
    cl = set(A0)
    if not cl <= M.atoms:
        raise ValueError("A0 must be a subset of the model")
    entries = [(atoms_of(x), atoms_of(y)) for table in M.maps.values() for x, y in table.items()]
    changed = True
    while changed:
        changed = False
        for ins, outs in entries:
            if ins <= cl and not outs <= cl:
                cl |= outs
                changed = True
            elif outs <= cl and not ins <= cl:
                cl |= ins
                changed = True
    return frozenset(cl)


closure_z = closure
closure_n = closure


# -- amalgamation -------------------------------------------------------------------


def _merge(M1: Model, M2: Model) -> dict:
    maps = {}
    for name in M1.MAPS:
        merged = dict(M1.maps[name])
        reverse = {y: x for x, y in merged.items()}
        for x, y in M2.maps[name].items():
            if x in merged and merged[x] != y:
                raise AmalgamationError(f"{name} conflict on {x!r}: {merged[x]!r} vs {y!r}")
            if y in reverse and reverse[y] != x:
                raise AmalgamationError(f"{name} images collide: {reverse[y]!r} and {x!r} both go to {y!r}")
            merged[x] = y
            reverse[y] = x
        maps[name] = merged
    return maps


def amalgamate_n(M1: ModelN, M2: ModelN, t: int, max_set_size: int | None = None,
                 reason: str = "amalgam") -> ModelN:
    """``t`` rounds of the common-extension recursion.

    Round ``i`` gives every unfulfilled finite set ``E`` a fresh pair
    ``<a_E, b_E>``; the remaining unfulfilled sets form the frontier.
    """
    maps = _merge(M1, M2)
    M = ModelN(M1.atoms | M2.atoms, maps, max_set_size)
    for i in range(t):
        todo = list(M.frontier("h"))
        for E in todo:
            a, b = fresh(i, reason, E, "a"), fresh(i, reason, E, "b")
            M.atoms.update((a, b))
            M.h[E] = Pair(a, b)
    return M


# -- the {x, y, z} extension -------------------------------------------------------------


@dataclass
class XYZExtension:
    model: ModelN
    base: ModelN
    x: Atom
    y: Atom
    z: Atom

    @property
    def xyz(self) -> tuple:
        return (self.x, self.y, self.z)

    def a_atoms(self) -> list[Atom]:
        return sorted((a for a in self.model.atoms if a.tag == "fresh" and a.payload[1] == "xyz-a"), key=sort_key)

    def rule_of(self, E: FinSet) -> int:
        return len(set(E) & set(self.xyz))

    def permutations(self) -> list[Permutation]:
        """The six permutations of ``{x, y, z}`` fixing all other atoms."""
        out = []
        for img in itertools.permutations(self.xyz):
            out.append(Permutation(dict(zip(self.xyz, img))))
        return out


def xyz_extension_n(N1: ModelN, t: int, max_set_size: int | None = None) -> XYZExtension:
    """Add ``x, y, z`` and fresh ``a``-atoms, fulfilling new sets by the
    four rules on ``c = |E & {x,y,z}|``:

    * ``c`` in {0, 3}: ``<a, a'>`` fresh,
    * ``c = 1``: ``<u, a>`` with ``u`` the member of ``E & {x,y,z}``,
    * ``c = 2``: ``<v, a>`` with ``v`` the missing member.

    The ``a``-atoms are keyed by ``(E \\ {x,y,z}, c)``, so the sets that
    differ only inside ``{x,y,z}`` share them; this makes every
    permutation of ``x, y, z`` an automorphism and keeps ``g`` injective.
    """
    if not N1.is_injective():
        raise ValueError("N1 must be injective")
    xyz = tuple(fresh(0, "xyz", EMPTY, r) for r in ("x", "y", "z"))
    M = ModelN(N1.atoms | set(xyz), N1.maps, max_set_size)
    xyz_set = set(xyz)
    for i in range(t):
        for E in list(M.frontier("h")):
            inside = set(E) & xyz_set
            R = FinSet(set(E) - xyz_set)
            c = len(inside)

            def a(j):
                return fresh(i, "xyz-a", R, (c, j))

            if c in (0, 3):
                value = Pair(a(0), a(1))
            elif c == 1:
                (u,) = inside
                value = Pair(u, a(0))
            else:
                (v,) = xyz_set - inside
                value = Pair(v, a(0))
            M.atoms.update(atoms_of(value))
            M.h[E] = value
    return XYZExtension(M, N1, *xyz)


def xyz_sequences(x: Atom, y: Atom, z: Atom) -> list[Seq]:
    """Repetition-free sequences of length 2 or 3 over ``{x, y, z}``."""
    return [Seq(p) for n in (2, 3) for p in itertools.permutations((x, y, z), n)]


def xyz_offdiagonal_pairs(x: Atom, y: Atom, z: Atom) -> list[Pair]:
    return [Pair(a, b) for a, b in itertools.permutations((x, y, z), 2)]


def audit_xyz_rules(ext: XYZExtension) -> list:
    """Entries outside the base model that break the four rules."""
    bad = []
    xyz = set(ext.xyz)
    for E, (e1, e2) in ext.model.h.items():
        if atoms_of(E) <= ext.base.atoms:
            continue
        inside = set(E) & xyz
        c = len(inside)
        if c in (0, 3):
            ok = e1 not in xyz and e2 not in xyz and e1 != e2
        elif c == 1:
            ok = {e1} == inside and e2 not in xyz
        else:
            ok = {e1} == xyz - inside and e2 not in xyz
        ok = ok and e2 not in ext.base.atoms and (c == 1 or c == 2 or e1 not in ext.base.atoms)
        if not ok:
            bad.append((E, Pair(e1, e2)))
    return bad


# -- the copy tower ---------------------------------------------------------------------


@dataclass
class TowerStage:
    G1: frozenset
    Gstar: frozenset
    G2: frozenset
    handled: list
    tau: dict


@dataclass
class CopyTower:
    model: ModelN
    base: ModelN
    u: tuple
    stages: list = field(default_factory=list)

    def tau_set(self, i: int, E: FinSet) -> FinSet:
        tau = self.stages[i].tau
        return FinSet(a if a in self.base.atoms else tau[a] for a in E)


def copy_tower_n(N1: ModelN, t: int, max_set_size: int | None = None) -> CopyTower:
    """``t`` stages of the ``G^1 / G^* / G^2`` recursion.

    Stage ``i`` gives each unfulfilled ``E`` a fresh pair ``<x_E, y_E>``,
    adds a copy ``tau_i(a)`` of every atom outside ``N1``, and assigns
    ``tau_i(E) -> <y_E, x_E>``. Sets inside ``N1`` satisfy
    ``tau_i(E) = E`` and so receive no transposed copy.
    """
    if not N1.is_injective():
        raise ValueError("N1 must be injective")
    u = tuple(fresh(0, "tower-u", EMPTY, r) for r in ("a", "b", "c"))
    M = ModelN(N1.atoms | set(u), N1.maps, max_set_size)
    tower = CopyTower(M, N1, u)
    for i in range(t):
        G1 = frozenset(M.atoms)
        handled = list(M.frontier("h"))
        for E in handled:
            x, y = fresh(i, "tower", E, "x"), fresh(i, "tower", E, "y")
            M.atoms.update((x, y))
            M.h[E] = Pair(x, y)
        Gstar = frozenset(M.atoms)
        tau = {a: fresh(i, "tower-tau", a, "copy") for a in G1 - N1.atoms}
        M.atoms.update(tau.values())
        stage = TowerStage(G1, Gstar, frozenset(), handled, tau)
        tower.stages.append(stage)
        for E in handled:
            if atoms_of(E) <= N1.atoms:
                continue
            x, y = M.h[E]
            M.h[tower.tau_set(i, E)] = Pair(y, x)
        stage.G2 = frozenset(M.atoms)
    return tower


def tower_automorphism(tower: CopyTower, n: int = 0) -> Permutation | None:
    """The transposing map for stage ``n``.

    On ``G^1_n \\ N1`` it swaps ``a`` with ``tau_n(a)``, on the stage-``n``
    pairs it swaps ``x_E`` with ``y_E`` (sets inside ``N1`` excepted), it
    fixes ``N1``, and later stages follow by keys. Whether the result is an
    automorphism is left to :func:`is_automorphism`.
    """
    stage = tower.stages[n]
    base_map: dict = {a: a for a in tower.base.atoms}
    for a, c in stage.tau.items():
        base_map[a] = c
        base_map[c] = a
    for E in stage.handled:
        x, y = tower.model.h[E]
        if atoms_of(E) <= tower.base.atoms:
            base_map[x], base_map[y] = x, y
        else:
            base_map[x], base_map[y] = y, x
    return extend_by_keys(base_map, tower.model.atoms)


# -- plain extension -----------------------------------------------------------------------


def plain_extension_z(seed: ModelZ, t: int, max_len: int | None = None, reason: str = "plain") -> ModelZ:
    """``t`` rounds of the plain extension.

    Each unfulfilled ``P`` in ``M_j^2`` gets ``{a_P, b_P}``, each unfulfilled
    ``Q`` in ``[M_j]^2`` gets ``<a_Q, b_Q, c_Q>`` and each unfulfilled
    ``R`` in ``seq^{1-1}(M_j)`` gets ``{a_R, b_R, c_R}``, all fresh.
    """
    if not seed.is_injective():
        raise ValueError("seed maps must be injective")
    M = ModelZ(seed.atoms, seed.maps, seed.max_set_size, max_len if max_len is not None else seed.max_len)
    for j in range(t):
        todo = {name: list(M.frontier(name)) for name in M.MAPS}
        for P in todo["f"]:
            M.f[P] = FinSet(fresh(j, reason + "-f", P, r) for r in "ab")
        for Q in todo["g"]:
            M.g[Q] = Seq(fresh(j, reason + "-g", Q, r) for r in "abc")
        for R in todo["h"]:
            M.h[R] = FinSet(fresh(j, reason + "-h", R, r) for r in "abc")
        for name in M.MAPS:
            for x in todo[name]:
                M.atoms.update(atoms_of(M.maps[name][x]))
    return M


def plain_extension_automorphism(M: Model, pi: Permutation) -> Permutation | None:
    """Extend a permutation of the seed atoms through the fresh blocks."""
    return extend_by_keys(dict(pi.mapping), M.atoms)


# -- finite-stage limit ----------------------------------------------------------------------


def _pattern_inputs(cls, atoms, size_bound):
    probe = cls(atoms, max_len=size_bound)
    return {name: list(probe.inputs(name)) for name in cls.MAPS}


def _codomain(kind: Kind, atoms, size_bound):
    if kind is Kind.ISEQ:
        return list(enum_kind(Kind.ISEQ, atoms, size_bound))
    return list(enum_kind(kind, atoms))


def canonical_form(M: Model) -> str:
    """Isomorphism-invariant text of a small model (brute force over orderings)."""
    atoms = M.sorted_atoms()
    best = None
    for order in itertools.permutations(atoms):
        rename = Permutation({a: base(i) for i, a in enumerate(order)}, partial=True)
        text = repr(sorted((name, sort_key(act(rename, x)), sort_key(act(rename, y)))
                           for name, table in M.maps.items() for x, y in table.items()))
        if best is None or text < best:
            best = text
    return f"{len(atoms)}|{best}"


def enumerate_patterns(class_tag: str, size_bound: int) -> list[Model]:
    """Representatives of the non-empty partial models with
    ``|atoms| + |entries| <= size_bound``, up to isomorphism.

    Inputs over no atoms (the empty set, the empty sequence) stay undefined.
    """
    cls = {"N": ModelN, "Z": ModelZ}[class_tag]
    reps: dict = {}
    for b in range(1, size_bound + 1):
        atoms = [base(i) for i in range(b)]
        inputs = _pattern_inputs(cls, atoms, size_bound)
        codomains = {name: _codomain(cls.MAPS[name][1], atoms, size_bound) for name in cls.MAPS}
        # inputs over no atoms belong to the base model, so patterns leave them open
        slots = [(name, x) for name in cls.MAPS for x in inputs[name] if atoms_of(x)]
        for d in range(size_bound - b + 1):
            for chosen in itertools.combinations(slots, d):
                for values in itertools.product(*(codomains[name] for name, _ in chosen)):
                    maps = {name: {} for name in cls.MAPS}
                    ok = True
                    for (name, x), y in zip(chosen, values):
                        if y in maps[name].values():
                            ok = False
                            break
                        maps[name][x] = y
                    if not ok:
                        continue
                    M = cls(atoms, maps)
                    key = canonical_form(M)
                    reps.setdefault(key, M)
    return [reps[k] for k in sorted(reps)]


@dataclass
class LimitResult:
    model: Model
    patterns: list
    copies: list  # (pattern index, copy number, {pattern atom: model atom})
    truncated: bool = False
    stages_run: int = 0


def _mixed_inputs(M: Model, name: str, left: set, right: set):
    for x in M.inputs(name, left | right):
        xs = atoms_of(x)
        if xs & left and xs & right:
            yield x


def limit_stage(class_tag: str, size_bound: int, stage_bound: int, seed: Model | None = None,
                copies: int = 2, atom_budget: int = 20_000) -> LimitResult:
    """A finite analogue of the limit recursion.

    Stage 1 adds ``copies`` disjoint copies of every pattern of size at most
    ``size_bound`` (one-step extensions of the empty model). Each later
    stage amalgamates every pair of copies over their empty intersection:
    inputs meeting both copies receive fresh disjoint blocks. When the atom
    budget runs out the result is flagged as truncated.
    """
    if size_bound < 0 or stage_bound < 0:
        raise ValueError("bounds must be non-negative")
    cls = {"N": ModelN, "Z": ModelZ}[class_tag]
    M = seed.copy() if seed is not None else cls()
    if type(M) is not cls:
        raise ValueError("seed class does not match class_tag")
    patterns = enumerate_patterns(class_tag, size_bound) if size_bound else []
    result = LimitResult(M, patterns, [])
    if stage_bound == 0 or not patterns:
        return result
    for p_index, P in enumerate(patterns):
        for c in range(copies):
            rename = {a: fresh(1, "limit-copy", (p_index, c, i), "c") for i, a in enumerate(P.sorted_atoms())}
            pi = Permutation(rename, partial=True)
            M.atoms.update(rename.values())
            for name, table in P.maps.items():
                for x, y in table.items():
                    M.maps[name][act(pi, x)] = act(pi, y)
            result.copies.append((p_index, c, rename))
    result.stages_run = 1
    blocks = {"h": 2} if class_tag == "N" else {"f": 2, "g": 3, "h": 3}
    for stage in range(2, stage_bound + 1):
        current = [set(r.values()) for _, _, r in result.copies]
        for i, j in itertools.combinations(range(len(current)), 2):
            left, right = current[i], current[j]
            for name in cls.MAPS:
                for x in _mixed_inputs(M, name, left, right):
                    if x in M.maps[name]:
                        continue
                    roles = "abc"[: blocks[name]]
                    new = [fresh(stage, "limit-" + name, x, r) for r in roles]
                    kind = cls.MAPS[name][1]
                    value = Seq(new) if kind is Kind.ISEQ else Pair(*new) if kind is Kind.OPAIR else FinSet(new)
                    M.maps[name][x] = value
                    M.atoms.update(new)
                    if len(M.atoms) > atom_budget:
                        result.truncated = True
                        result.stages_run = stage
                        return result
        result.stages_run = stage
    return result


def find_embedding(P: Model, M: Model, node_budget: int = 200_000) -> dict | None:
    """An induced embedding of the small model ``P`` into ``M``: defined
    inputs go to defined inputs with matching images, undefined ones to
    undefined ones."""
    p_atoms = P.sorted_atoms()
    m_atoms = M.sorted_atoms()
    checks: dict = {i: [] for i in range(len(p_atoms))}
    index = {a: i for i, a in enumerate(p_atoms)}
    probe = type(P)(p_atoms, max_len=max([len(x) for t in P.maps.values() for x in t if isinstance(x, Seq)] + [len(p_atoms)]))
    for name in P.MAPS:
        for x in probe.inputs(name):
            involved = atoms_of(x) | (atoms_of(P.maps[name][x]) if x in P.maps[name] else set())
            last = max((index[a] for a in involved), default=-1)
            if atoms_of(x):
                checks[last].append((name, x))
    budget = [node_budget]

    def consistent(i, assign):
        img = assign.__getitem__
        for name, x in checks[i]:
            mx = _map_key(x, img)
            if x in P.maps[name]:
                if M.maps[name].get(mx) != _map_key(P.maps[name][x], img):
                    return False
            elif mx in M.maps[name]:
                return False
        return True

    def search(i, assign, used):
        if i == len(p_atoms):
            return dict(assign)
        if p_atoms[i] in assign:
            if not consistent(i, assign):
                return None
            return search(i + 1, assign, used)
        for cand in m_atoms:
            if cand in used:
                continue
            budget[0] -= 1
            if budget[0] < 0:
                return None
            assign[p_atoms[i]] = cand
            if consistent(i, assign):
                used.add(cand)
                found = search(i + 1, assign, used)
                if found is not None:
                    return found
                used.discard(cand)
            del assign[p_atoms[i]]
        return None

    anchor = max(((name, x) for name in P.maps for x in P.maps[name]),
                 key=lambda e: len(atoms_of(e[1]) | atoms_of(P.maps[e[0]][e[1]])), default=None)
    if anchor is None:
        return search(0, {}, set())
    # Seed the search with every way the largest entry can land on an entry of M.
    name, x = anchor
    for mx, my in M.maps[name].items():
        for seeded in _match_entry(x, P.maps[name][x], mx, my):
            if len(set(seeded.values())) != len(seeded):
                continue
            budget[0] -= 1
            if budget[0] < 0:
                return None
            found = search(0, dict(seeded), set(seeded.values()))
            if found is not None:
                return found
    return None


def _match_entry(px, py, mx, my):
    """All atom assignments sending the entry ``px -> py`` onto ``mx -> my``."""
    def unify(p, m, assign):
        if isinstance(p, Atom):
            if not isinstance(m, Atom):
                return
            if p in assign:
                if assign[p] == m:
                    yield assign
                return
            out = dict(assign)
            out[p] = m
            yield out
        elif isinstance(p, (Pair, Seq)):
            if type(p) is not type(m) or len(tuple(p)) != len(tuple(m)):
                return
            yield from unify_list(list(p), list(m), assign)
        elif isinstance(p, FinSet):
            if not isinstance(m, FinSet) or len(p) != len(m):
                return
            ps, ms = sorted(p, key=sort_key), list(m)
            for perm in itertools.permutations(ms):
                yield from unify_list(ps, list(perm), assign)
        elif p != m:
            return
        else:
            yield assign

    def unify_list(ps, ms, assign):
        if not ps:
            yield assign
            return
        for a in unify(ps[0], ms[0], assign):
            yield from unify_list(ps[1:], ms[1:], a)

    seen = set()
    for a in unify_list([px, py], [mx, my], {}):
        key = tuple(sorted(((sort_key(k), sort_key(v)) for k, v in a.items())))
        if key not in seen:
            seen.add(key)
            yield a


def _support_copies(a: Atom, copy_of: dict) -> set:
    if a in copy_of:
        return {copy_of[a]}
    if a.tag != "fresh":
        return set()
    return set().union(*(_support_copies(b, copy_of) for b in atoms_of_key(a.payload[2])))


def atoms_of_key(key) -> set:
    if isinstance(key, Atom):
        return {key}
    if isinstance(key, (FinSet, Seq, tuple)):
        return set().union(*(atoms_of_key(k) for k in key)) if len(key) else set()
    if isinstance(key, Pair):
        return atoms_of_key(key.first) | atoms_of_key(key.second)
    return set()


def find_moving_automorphism(result: LimitResult, N: Iterable[Atom], A: Iterable[Atom]) -> Permutation | None:
    """An automorphism fixing ``N`` pointwise with ``pi(A) \\ N`` disjoint from ``A``.

    Copies that ``A \\ N`` depends on are swapped with unused copies of the
    same pattern (backtracking over the choice of partner); everything else
    follows by keys. Candidates are checked with :func:`is_automorphism`.
    """
    N, A = set(N), set(A)
    copy_of = {}
    by_pattern: dict = {}
    for k, (p, _c, rename) in enumerate(result.copies):
        by_pattern.setdefault(p, []).append(k)
        for m in rename.values():
            copy_of[m] = k
    needed = sorted(set().union(*(_support_copies(a, copy_of) for a in A - N)) if A - N else set())
    frozen = set().union(*(_support_copies(a, copy_of) for a in N)) if N else set()
    if set(needed) & frozen:
        return None
    blocked = set(needed) | frozen

    def build(assignment):
        base_map = {}
        for src, dst in assignment.items():
            s_ren, d_ren = result.copies[src][2], result.copies[dst][2]
            for pa in s_ren:
                base_map[s_ren[pa]] = d_ren[pa]
                base_map[d_ren[pa]] = s_ren[pa]
        return extend_by_keys(base_map, result.model.atoms)

    def search(i, assignment, used):
        if i == len(needed):
            pi = build(assignment)
            if pi is None or not is_automorphism(result.model, pi)[0]:
                return None
            if any(pi(a) != a for a in N):
                return None
            moved = {pi(a) for a in A} - N
            return pi if not moved & A else None
        src = needed[i]
        for dst in by_pattern[result.copies[src][0]]:
            if dst in blocked or dst in used:
                continue
            assignment[src] = dst
            used.add(dst)
            found = search(i + 1, assignment, used)
            if found is not None:
                return found
            used.discard(dst)
            del assignment[src]
        return None

    return search(0, {}, set())
