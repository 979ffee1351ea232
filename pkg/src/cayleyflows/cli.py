"""Command-line driver.

Exit codes: 0 success, 2 usage error, 3 memory guard or search budget tripped
(also used when no exact length method covers the element), 1 internal
invariant violation. On exit 1 a reproduction file is written into the cache
directory, or the working directory when no cache is configured.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import traceback

from . import config
from .config import BudgetExceeded
from .deadend import (DepthError, construct_theorem1, nonstrict_depth, paper_example, strict_depth,
                      verify_certificate)
from .geodesic import (LengthError, bfs_length_oracle, length_connected_balanced, length_exact_metabelian)
from .growth import SAW_CONSTANT, ball_sizes, rate_estimates, saw_counts
from .relations import check_recursion, shortest_relation
from .tower import GroupSpec, SpecError, canonical_hash, equals, from_word, serialize
from .words import WordError, cyclic_reduce, enumerate_irreducible, parse

INLINE_LIMIT = 1 << 20  # bytes of serialized element printed inline by `construct`


class UsageError(Exception):
    pass


class InvariantViolation(Exception):
    def __init__(self, msg, payload=None):
        super().__init__(msg)
        self.payload = payload or {}


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _spec(args) -> GroupSpec:
    return GroupSpec(args.m, args.d)


def _word(text: str, m: int):
    return parse(text, m)


# ---------------------------------------------------------------- subcommands

def cmd_reduce(args):
    w = _word(args.word, args.m)
    rec = {"reduced": str(w), "cyclic": str(cyclic_reduce(w)), "length": len(w)}
    text = f"{w}\ncyclically reduced: {rec['cyclic']}"
    return rec, text


def cmd_eq(args):
    spec = _spec(args)
    x, y = from_word(_word(args.w1, args.m), spec), from_word(_word(args.w2, args.m), spec)
    same = equals(x, y)
    if same != (canonical_hash(x) == canonical_hash(y)):
        raise InvariantViolation("equality and canonical hash disagree",
                                 {"w1": args.w1, "w2": args.w2, "spec": str(spec)})
    return {"equal": same, "spec": str(spec)}, "equal" if same else "not equal"


def _length_result(x):
    if x.spec.d == 1:
        n = sum(abs(a) for a in x.payload)
        return {"length": n, "N": n, "conn": 0, "witness": None}
    if x.spec.d == 2:
        return length_exact_metabelian(x).to_dict()
    return length_connected_balanced(x).to_dict()


def cmd_length(args):
    spec = _spec(args)
    x = from_word(_word(args.word, args.m), spec)
    try:
        rec = _length_result(x)
    except LengthError as exc:
        if args.oracle_radius is None:
            raise
        rec = {"length": None, "N": None, "conn": None, "witness": None, "note": str(exc)}
    text = f"|g| = {rec['length']}"
    if rec.get("witness") is not None:
        text += f"\ngeodesic: {rec['witness']}"
    if args.oracle_radius is not None:
        o = bfs_length_oracle(x, args.oracle_radius, args.mem_limit)
        rec["oracle"] = o
        text += f"\noracle: {o if o is not None else f'beyond radius {args.oracle_radius}'}"
        if o is not None and rec["length"] is not None and o != rec["length"]:
            raise InvariantViolation("exact length disagrees with breadth-first search",
                                     {"word": args.word, "spec": str(spec), "exact": rec, "oracle": o})
    return rec, text


def _chain_text(rep) -> str:
    lines = [f"|g| = {rep.length}"]
    for k, ls in rep.chain:
        lines.append(f"k={k}: lengths {', '.join(map(str, ls))}")
    return "\n".join(lines)


def cmd_depth(args):
    spec = _spec(args)
    x = from_word(_word(args.word, args.m), spec)
    if args.nonstrict:
        n = nonstrict_depth(x, args.max_k)
        return {"nonstrict_depth": n}, f"non-strict depth: {n}"
    rep = strict_depth(x, args.max_k)
    text = _chain_text(rep) + f"\nstrict depth: {rep.strict_depth}"
    if rep.limiting_witness is not None:
        text += f"\nstops at g*{rep.limiting_witness} with length {rep.limiting_length}"
    return rep.to_dict(), text


def cmd_example(args):
    g = paper_example()
    rep = strict_depth(g, 3)
    steps = {}
    for k in (1, 2):
        steps[k] = {str(w): length_exact_metabelian(g * from_word(w, g.spec), witness=False).length
                    for w in enumerate_irreducible(2, k)}
    aba = length_exact_metabelian(g * from_word("abA", g.spec), witness=False).length
    rec = {
        "word": str(parse("bbaBaBBABAAbAbbabaBB")),
        "length": rep.length,
        "step1": steps[1],
        "step2": steps[2],
        "abA": aba,
        "depth": rep.to_dict(),
    }
    text = "\n".join([
        f"g = {rec['word']}",
        f"|g| = {rep.length}",
        "|g x|: " + " ".join(f"{w}={n}" for w, n in steps[1].items()),
        "|g xy|: " + " ".join(f"{w}={n}" for w, n in steps[2].items()),
        f"|g abA| = {aba}",
        f"strict depth: {rep.strict_depth}",
        f"stops at g*{rep.limiting_witness} with length {rep.limiting_length}",
    ])
    return rec, text


def cmd_relation(args):
    spec = _spec(args)
    res = shortest_relation(spec, args.max_len)
    rec = res.to_dict()
    if res.rho is None:
        text = f"no relation of length <= {args.max_len}; lower bound {res.lower_bound}"
    else:
        text = f"rho = {res.rho}\n" + "\n".join(map(str, res.witnesses))
    if spec.d == 2 and res.rho is not None:
        base = shortest_relation(GroupSpec(spec.m, 1), 4)
        rec["recursion_ok"] = check_recursion(base.rho, res.rho)
    return rec, text


def _estimated_bytes(x) -> int:
    """Rough size of ``serialize(x)``; flow values dominate once they have thousands of digits."""
    if x.spec.d == 1:
        return 64
    per_edge = 60 if x.spec.d == 2 else 60 + 80 * x.spec.d
    return sum(abs(v).bit_length() * 30103 // 100000 + per_edge for v in x.payload.values.values())


def cmd_construct(args):
    if args.d < 2:
        raise UsageError("construct needs --d >= 2 (the target group carries flows)")
    base_spec = GroupSpec(args.m, args.d - 1)
    x, cert = construct_theorem1(base_spec, args.k, multipliers=args.multipliers)
    rec = {"certificate": cert.to_dict(), "element": None, "element_file": None, "hash": None}
    size = _estimated_bytes(x)
    limit = args.max_bytes << 20
    if size > limit or (not args.out and size > INLINE_LIMIT):
        where = "--max-bytes" if size > limit else "the inline limit; pass --out FILE"
        rec["element_omitted"] = f"about {size >> 20} MiB exceeds {where}"
    else:
        blob = serialize(x)
        rec["hash"] = canonical_hash(x)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(blob + "\n")
            rec["element_file"] = args.out
        else:
            rec["element"] = json.loads(blob)
    if args.verify:
        ok, diag = verify_certificate(cert, x)
        rec["verified"] = ok
        if not ok:
            raise InvariantViolation("freshly built certificate failed verification",
                                     {"certificate": cert.to_dict(), "diagnostics": diag})
    n_text = str(cert.N) if cert.N.bit_length() < 200 else f"{cert.N.bit_length()} bits"
    text = "\n".join([
        f"element of {x.spec} with {len(x.payload)} support edges, weight {n_text}",
        f"k = {cert.k}, rho >= {cert.rho_lower}, sphere covered: {cert.sphere_coverage}, "
        f"connected: {cert.support_connected}, distance: {cert.distance_check}",
        f"certificate valid: {cert.valid}" + (f", verified: {rec['verified']}" if args.verify else ""),
    ])
    if rec["element_file"]:
        text += f"\nelement written to {args.out}"
    elif "element_omitted" in rec:
        text += f"\nelement not written: {rec['element_omitted']}"
    elif args.verbose:
        text += "\n" + serialize(x)
    return rec, text


def cmd_growth(args):
    spec = _spec(args)
    series = ball_sizes(spec, args.n, args.mem_limit, args.cache_dir, args.threads)
    rec = {"kind": series.kind, "spec": str(spec), "counts": series.counts, "truncated": series.truncated,
           "estimates": [f"{r:.12f}" for r in rate_estimates(series)] if len(series.counts) > 1 else []}
    text = series.to_csv().rstrip("\n")
    if series.truncated:
        text += f"\n# truncated: {series.notes.get('guard')}"
    return rec, text


def cmd_saw(args):
    series = saw_counts(args.n, threads=args.threads)
    rec = {"kind": "saw", "counts": series.counts[1:], "reference_rate": SAW_CONSTANT,
           "estimates": [f"{r:.12f}" for r in rate_estimates(series)]}
    text = series.to_csv().rstrip("\n")
    text += f"\n# reference: cited lower bound {SAW_CONSTANT} for the SAW growth rate (not computed here)"
    return rec, text


# ---------------------------------------------------------------- parser

def _global_flags(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("--cache-dir", default=d(None), help="ball cache directory (env CAYLEYFLOWS_CACHE)")
    p.add_argument("--mem-limit", type=int, default=d(None), metavar="MIB", help="memory guard in MiB")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads")


def _group_flags(p):
    p.add_argument("--m", type=int, default=2, help="number of generators (default 2)")
    p.add_argument("--d", type=int, default=2, help="derived length (default 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cayleyflows", description=__doc__.splitlines()[0])
    _global_flags(parser, False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, True)
        p.set_defaults(fn=fn)
        return p

    p = add("reduce", cmd_reduce, "free reduction of a word")
    p.add_argument("word")
    p.add_argument("--m", type=int, default=None)

    p = add("eq", cmd_eq, "word problem in Sol(m,d)")
    p.add_argument("w1")
    p.add_argument("w2")
    _group_flags(p)

    p = add("length", cmd_length, "exact length and a geodesic word")
    p.add_argument("word")
    _group_flags(p)
    p.add_argument("--oracle-radius", type=int, default=None, help="cross-check by breadth-first search")

    p = add("depth", cmd_depth, "dead-end depth")
    p.add_argument("word")
    _group_flags(p)
    p.add_argument("--max-k", type=int, default=4)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", action="store_true", default=True)
    mode.add_argument("--nonstrict", action="store_true")

    add("example", cmd_example, "the depth-2 dead end of Sol(2,2) and its length chain")

    p = add("relation", cmd_relation, "shortest relation of Sol(m,d)")
    _group_flags(p)
    p.add_argument("--max-len", type=int, default=14)

    p = add("construct", cmd_construct, "strict dead end of depth k with certificate")
    _group_flags(p)
    p.add_argument("--k", type=int, default=None, help="depth (default: largest allowed)")
    p.add_argument("--multipliers", choices=["proof", "loop", "unit"], default="proof")
    p.add_argument("--out", default=None, help="write the element here instead of inline")
    p.add_argument("--verify", action="store_true", help="re-derive the certificate from the element")
    p.add_argument("--verbose", action="store_true", help="print the element in text mode")
    p.add_argument("--max-bytes", type=int, default=64, metavar="MIB",
                   help="largest element serialization written (default 64 MiB)")

    p = add("growth", cmd_growth, "ball sizes as CSV")
    _group_flags(p)
    p.add_argument("--n", type=int, default=6)

    p = add("saw", cmd_saw, "self-avoiding walk counts as CSV")
    p.add_argument("--n", type=int, default=10)
    return parser


def _write_repro(args, argv, exc) -> str:
    where = args.cache_dir or os.getcwd()
    os.makedirs(where, exist_ok=True)
    path = os.path.join(where, f"cayleyflows-repro-{int(time.time() * 1000)}.json")
    doc = {"argv": list(argv), "error": str(exc), "traceback": traceback.format_exc()}
    if isinstance(exc, InvariantViolation):
        doc["context"] = exc.payload
    elif isinstance(exc, DepthError) and exc.element is not None:
        doc["element"] = json.loads(serialize(exc.element))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
    return path


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.cache_dir = config.cache_dir(args.cache_dir)
    if args.mem_limit is None:
        args.mem_limit = config.DEFAULT_MEM_LIMIT_MIB
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return 2
    try:
        rec, text = args.fn(args)
    except (UsageError, WordError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceeded, MemoryError) as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return 3
    except LengthError as exc:
        print(f"no exact length available here ({exc}); try --oracle-radius", file=sys.stderr)
        return 3
    except (InvariantViolation, DepthError, AssertionError) as exc:
        path = _write_repro(args, argv, exc)
        print(f"invariant violation: {exc}\nreproduction written to {path}", file=sys.stderr)
        return 1
    print(_dump(rec) if args.json else text)
    if rec.get("truncated") or rec.get("element_omitted"):
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
