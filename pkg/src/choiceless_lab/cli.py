"""Command-line front end.

Subcommands: ``count``, ``witness``, ``model-build``, ``verify``, ``orbit``.
JSON is the source of truth; ``--format text`` prints a projection of the
same document. Exit codes: 0 all checks verified (or a witness produced),
1 a refuted report, 2 an inconclusive or truncated result, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Sequence

from . import classic, fraisse, verify, witnesses
from .symmetry import GroupSpec, OrbitTooLarge, orbit, rc_triple
from .universe import (
    FinSet, Kind, ResourceLimit, base, count_kind, decode, decode_atom, encode, enum_kind, sorted_objects,
)

EXIT_OK, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64
SCHEMA_VERSION = "1"
CHAIN_ORDER = (Kind.UPAIR, Kind.OPAIR, Kind.FIN, Kind.ISEQ)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(raw: str) -> int:
    v = int(raw)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(raw: str) -> int:
    v = int(raw)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _seed(raw: str) -> int:
    v = int(raw, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", help="write the document here instead of stdout")
    common.add_argument("--seed", type=_seed, default=0, help="64-bit replay seed")
    common.add_argument("--timing", action="store_true", help="add wall-clock runtime (breaks byte-identity)")

    p = _Parser(prog="choiceless-lab", description="Desk-scale checks for four cardinalities over atoms.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", parents=[common], help="count the four kinds over k atoms")
    c.add_argument("--kinds", default="all", help="'all' or a comma list of fin, opair, upair, iseq")
    c.add_argument("--k", type=_natural, action="append", help="ground size (repeatable; default 5)")

    w = sub.add_parser("witness", parents=[common], help="run an extraction procedure")
    w.add_argument("procedure", choices=("lemma-n", "lemma-c", "fin-to-one"))
    w.add_argument("--n", type=int, default=None, help="atoms to extract")
    w.add_argument("--k", type=_positive, default=6, help="ground size for fin-to-one")
    w.add_argument("--maxlen", type=_natural, default=3)
    w.add_argument("--stages", type=_positive, default=10, help="rounds for lemma-c")

    m = sub.add_parser("model-build", parents=[common], help="build a finite model")
    m.add_argument("--model", choices=verify.MODELS, required=True)
    m.add_argument("--stages", type=_natural, default=2)
    m.add_argument("--size-bound", type=_natural, default=2)
    m.add_argument("--triples", type=_natural, default=3)
    m.add_argument("--k", type=_positive, default=2, help="base atoms for rn")
    m.add_argument("--max-set-size", type=_positive, default=None)

    v = sub.add_parser("verify", parents=[common], help="report on every edge of a diagram")
    v.add_argument("--model", choices=verify.MODELS, required=True)
    v.add_argument("--triples", type=_natural, default=None)
    v.add_argument("--stages", type=_natural, default=None)
    v.add_argument("--size-bound", type=_natural, default=None)
    v.add_argument("--maxlen", type=_positive, default=None)
    v.add_argument("--max-set-size", type=_positive, default=None)

    o = sub.add_parser("orbit", parents=[common], help="Fix(E)-orbit of an object")
    o.add_argument("--model", choices=("rc", "free"), default="rc")
    o.add_argument("--triples", type=_positive, default=3)
    o.add_argument("--k", type=_positive, default=4, help="atoms of the free group")
    o.add_argument("--object", help="JSON encoding of the object (default: the first 2-set)")
    o.add_argument("--support", default="[]", help="JSON list of encoded atoms")
    return p


# -- commands --------------------------------------------------------------------


def cmd_count(args) -> tuple[dict, int]:
    if args.kinds == "all":
        kinds = list(CHAIN_ORDER)
    else:
        try:
            kinds = [Kind.parse(s.strip()) for s in args.kinds.split(",") if s.strip()]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if not kinds or Kind.SEQ in kinds:
            raise UsageError("kinds must be drawn from fin, opair, upair, iseq")
    ks = args.k or [5]
    rows = []
    for k in ks:
        counts = {kind.value: count_kind(kind, k) for kind in kinds}
        row = {"k": k, "counts": counts}
        if set(kinds) == set(CHAIN_ORDER):
            vals = [counts[kind.value] for kind in CHAIN_ORDER]
            strict = all(a < b for a, b in zip(vals, vals[1:]))
            row["chain"] = "strict chain holds" if strict else "strict chain fails"
        rows.append(row)
    return {"order": [kind.value for kind in kinds], "rows": rows}, EXIT_OK


def cmd_witness(args) -> tuple[dict, int]:
    if args.procedure == "lemma-n":
        n = 64 if args.n is None else args.n
        if n < 5:
            raise UsageError("lemma-n needs --n >= 5")
        supply = witnesses.AtomSupply(5)
        h = witnesses.InjectionOracle.random(Kind.FIN, Kind.OPAIR, args.seed, supply)
        seed_atoms = [base(i) for i in range(5)]
        atoms, trace = witnesses.extract_from_fin_to_square(h, seed_atoms, n)
        ok = witnesses.replay_fin_to_square(trace)
        return {"atoms": [encode(a) for a in atoms], "distinct": len(set(atoms)), "replayed": ok,
                "trace": trace.to_json()}, EXIT_OK if ok else EXIT_REFUTED
    if args.procedure == "lemma-c":
        n = 32 if args.n is None else args.n
        if n < 1:
            raise UsageError("lemma-c needs --n >= 1")
        supply = witnesses.AtomSupply(1)
        f = witnesses.InjectionOracle.random(Kind.OPAIR, Kind.UPAIR, args.seed, supply, fresh_rate=0.0)
        g = witnesses.InjectionOracle.random(Kind.FIN, Kind.ISEQ, args.seed + 1, supply, fresh_rate=0.5, max_len=12)
        atoms, trace, E_sets = witnesses.extract_from_pair_maps(f, g, base(0), n, rounds=args.stages)
        disjoint = all(not (set(a) & set(b)) for i, a in enumerate(E_sets) for b in E_sets[i + 1:])
        nonempty = all(len(E) > 0 for E in E_sets)
        ok = disjoint and nonempty and len(set(atoms)) == len(atoms) == n
        return {"atoms": [encode(a) for a in atoms], "distinct": len(set(atoms)),
                "E_sizes": [len(E) for E in E_sets], "disjoint": disjoint, "nonempty": nonempty,
                "trace": trace.to_json()}, EXIT_OK if ok else EXIT_REFUTED
    # fin-to-one
    emb = witnesses.Embedding([base(i) for i in range(args.k)])
    ground = [base(i) for i in range(args.k)]
    fibers: dict = {}
    for s in enum_kind(Kind.SEQ, ground, args.maxlen):
        F = witnesses.finite_to_one_seq_to_fin(emb, s)
        fibers.setdefault(F, []).append(s)
    rows = []
    ok = True
    for F in sorted_objects(fibers):
        decoded = [s for s in witnesses.fiber(emb, F) if len(s) <= args.maxlen and set(s) <= set(ground)]
        ok = ok and decoded == sorted_objects(fibers[F])
        rows.append({"image": encode(F), "fiber": [encode(s) for s in sorted_objects(fibers[F])]})
    return {"sequences": sum(len(v) for v in fibers.values()), "images": len(fibers),
            "max_fiber": max((len(v) for v in fibers.values()), default=0), "decoder_agrees": ok,
            "fibers": rows}, EXIT_OK if ok else EXIT_REFUTED


def cmd_model_build(args) -> tuple[dict, int]:
    if args.model in ("n", "z"):
        res = fraisse.limit_stage(args.model.upper(), args.size_bound, args.stages)
        doc = {"class": args.model.upper(), "patterns": len(res.patterns), "copies": len(res.copies),
               "stages_run": res.stages_run, "truncated": res.truncated, "atoms": len(res.model.atoms),
               "injective": res.model.is_injective(), "model": res.model.to_json()}
        return doc, EXIT_INCONCLUSIVE if res.truncated else EXIT_OK
    if args.model == "rn":
        universe = classic.rn_build(args.k, args.stages)
        return {"base": args.k, "depth": args.stages, "atoms": len(universe),
                "expected": classic.rn_size(args.k, args.stages),
                "universe": [encode(a) for a in universe]}, EXIT_OK
    if args.model == "rc":
        atoms = [a for n in range(args.triples) for a in rc_triple(n)]
        return {"triples": args.triples, "atoms": [encode(a) for a in atoms]}, EXIT_OK
    pts = classic.rz_points(range(1, args.triples + 1))
    return {"points": [encode(a) for a in pts]}, EXIT_OK


def cmd_verify(args, config: dict) -> tuple[list, int]:
    bounds = {"triples": args.triples, "stages": args.stages, "size_bound": args.size_bound,
              "maxlen": args.maxlen, "max_set_size": args.max_set_size, "seed": args.seed}
    reports = verify.diagram_report(args.model, bounds)
    docs = []
    for r in reports:
        d = r.to_json()
        d["bounds"] = {**d["bounds"], "config": config}
        docs.append(d)
    outcome = verify.overall_outcome(reports)
    code = {verify.VERIFIED: EXIT_OK, verify.REFUTED: EXIT_REFUTED, verify.INCONCLUSIVE: EXIT_INCONCLUSIVE}[outcome]
    return docs, code


def cmd_orbit(args) -> tuple[dict, int]:
    if args.model == "rc":
        spec = GroupSpec.rc(args.triples)
        default = FinSet(rc_triple(0)[:2])
    else:
        spec = GroupSpec.free([base(i) for i in range(args.k)])
        default = FinSet((base(0), base(1)))
    try:
        obj = decode(json.loads(args.object)) if args.object else default
        E = [decode_atom(a) for a in json.loads(args.support)]
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad --object or --support: {exc}") from None
    try:
        orb = orbit(obj, spec, E)
    except OrbitTooLarge as exc:
        return {"object": encode(obj), "truncated": True, "partial_size": len(exc.args[0]) if exc.args else None}, \
            EXIT_INCONCLUSIVE
    return {"object": encode(obj), "support": [encode(a) for a in E], "size": len(orb),
            "orbit": [encode(x) for x in sorted_objects(orb)]}, EXIT_OK


# -- output -----------------------------------------------------------------------------


def _text(doc) -> str:
    """A flat projection of the JSON document."""
    if isinstance(doc, list):
        lines = []
        for r in doc:
            c = r["claim"]
            op = "<=" if c["direction"] == "le" else "!<="
            metrics = json.dumps(r["metrics"], sort_keys=True)
            lines.append(f"{c['model']:<3} {c['from']:>5} {op:<3} {c['to']:<5} {c['scope']:<7} {r['outcome']:<24} {metrics}")
        return "\n".join(lines) + "\n"
    result = doc["result"]
    lines = [f"command: {doc['command']}", f"seed: {doc['seed']}"]
    if doc["command"] == "count":
        lines.append("k  " + "  ".join(f"{k:>6}" for k in result["order"]) + "  chain")
        for row in result["rows"]:
            cells = "  ".join(f"{row['counts'][k]:>6}" for k in result["order"])
            lines.append(f"{row['k']:<2} {cells}  {row.get('chain', '')}")
    else:
        for key in sorted(result):
            value = result[key]
            if isinstance(value, (list, dict)):
                value = json.dumps(value, sort_keys=True)
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def _config(args) -> dict:
    skip = {"out", "format", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config(args)
    start = time.perf_counter()
    try:
        if args.command == "verify":
            doc, code = cmd_verify(args, config)
        else:
            handler = {"count": cmd_count, "witness": cmd_witness, "model-build": cmd_model_build,
                       "orbit": cmd_orbit}[args.command]
            result, code = handler(args)
            doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": config,
                   "seed": args.seed, "result": result}
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"choiceless-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"choiceless-lab: resource limit: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if args.timing:
        runtime = round(time.perf_counter() - start, 6)
        if isinstance(doc, list):
            for d in doc:
                d["metrics"]["runtime_s"] = runtime
        else:
            doc["runtime_s"] = runtime
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n" if args.format == "json" else _text(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
