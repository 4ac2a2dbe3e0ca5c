"""Command-line interface.

Exit codes: 0 success, 2 precondition violation, 3 capacity/budget,
4 parse error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .arith import (CLASSIFIERS, CertificationError, PreconditionError, census,
                    census_histogram, ray_census)
from .braidsim import (BraidError, RejectionCapError, build_punctured_free, parse_permutation,
                       run_distribution)
from .catalog import CATALOG
from .homs import automorphism_group
from .ledger import ExperimentLedger
from .mass import TypeSpecError, count_A_Z, mass, parse_type
from .pcgroup.classes import class_data, element_order
from .pcgroup.presentation import PresentationError, format_pc, parse_pc
from .pcgroup.subgroups import abelianization, maximal_subgroups_abelianizations, p_class
from .pcgroup.table import CapacityError
from .pgen.tree import explore_tree

EXIT_OK, EXIT_PRECONDITION, EXIT_CAPACITY, EXIT_PARSE = 0, 2, 3, 4
DEFAULT_MAX_EXPONENT = 16          # without --extended


class UsageError(ValueError):
    pass


def parse_number(text: str) -> int:
    """``123``, ``10^5`` or ``2^8``."""
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        return int(base) ** int(exp)
    if "e" in text.lower():
        return int(float(text))
    return int(text)


def _power_exponent(text: str, p: int) -> int:
    if "^" in text:
        base, exp = text.split("^", 1)
        if int(base) != p:
            raise UsageError(f"--max-order must be a power of {p}")
        return int(exp)
    n, k = parse_number(text), 0
    while n > 1 and n % p == 0:
        n, k = n // p, k + 1
    if n != 1:
        raise UsageError(f"--max-order must be a power of {p}")
    return k


def _load_group(path):
    """A pc file, or ``catalog:NAME`` for a built-in group."""
    if str(path).startswith("catalog:"):
        name = str(path).split(":", 1)[1]
        if name not in CATALOG:
            raise UsageError(f"unknown catalog group {name!r}; known: {', '.join(sorted(CATALOG))}")
        return CATALOG[name]()
    return parse_pc(Path(path).read_text())


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "r", "type", "classifier", "outcome", "n"])
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, payload, text: str):
    print(json.dumps(payload, indent=1, sort_keys=True, default=str) if args.json else text)


def _ledger(args):
    return ExperimentLedger(args.ledger) if args.ledger else None


# ---------------------------------------------------------------------------
def cmd_group(args) -> int:
    G = _load_group(args.file)
    if args.action == "show":
        payload = {"p": G.p, "n": G.n, "order": G.order, "p_class": p_class(G) if G.n else 0,
                   "presentation": format_pc(G)}
        _emit(args, payload, f"order {G.order} = {G.p}^{G.n}, p-class {payload['p_class']}\n"
              + format_pc(G))
    elif args.action == "ab":
        inv = list(abelianization(G).invariants)
        _emit(args, {"abelianization": inv}, ",".join(map(str, inv)) or "1")
    elif args.action == "aut":
        order = automorphism_group(G).order
        _emit(args, {"aut_order": order}, str(order))
    elif args.action == "classes":
        rows = []
        for c in class_data(G).classes():
            rows.append({"representative": list(c.representative), "size": c.size,
                         "order": element_order(G, c.representative)})
        text = "\n".join(f"{' '.join(map(str, r['representative']))}  size {r['size']}  "
                         f"order {r['order']}" for r in rows)
        _emit(args, {"classes": rows}, text)
    elif args.action == "maxsub":
        abs_ = [list(a.invariants) for a in maximal_subgroups_abelianizations(G)]
        _emit(args, {"maximal_subgroup_abelianizations": abs_},
              "\n".join(",".join(map(str, a)) or "1" for a in abs_))
    return EXIT_OK


def cmd_mass(args) -> int:
    Z = parse_type(args.type)
    G = _load_group(args.file)
    if G.p != Z.p:
        A, aut, m, note = 0, None, Fraction(0), f"group is a {G.p}-group, type is for p = {Z.p}"
    else:
        A = count_A_Z(G, Z)
        aut = automorphism_group(G).order
        m = mass(G, Z, aut)
        note = ""
        if tuple(abelianization(G).invariants) != Z.w.invariants():
            note = "abelianization differs from W(Z)"
    payload = {"A": A, "aut_order": aut, "mass": str(m), "note": note}
    text = f"A={A} Aut={aut if aut is not None else '-'} mass={m}"
    if note:
        text += f"  ({note})"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_tree(args) -> int:
    Z = parse_type(args.type)
    if args.p is not None and args.p != Z.p:
        raise UsageError(f"--p {args.p} does not match the type")
    k = _power_exponent(args.max_order, Z.p)
    if k > DEFAULT_MAX_EXPONENT and not args.extended:
        raise UsageError(f"orders beyond {Z.p}^{DEFAULT_MAX_EXPONENT} need --extended")
    root = _load_group(args.root) if args.root else None
    res = explore_tree(root, Z, max_order_exponent=k, check_anomalies=not args.no_anomalies)
    out = res.to_json()
    ok = all(c[3] for c in res.conservation)
    if args.out:
        Path(args.out).write_text(res.dumps())
    if args.json or not args.out:
        print(res.dumps())
    lines = []
    for node in res.nodes():
        lines.append(f"{node.name:12s} {Z.p}^{node.order_exponent:<3d} class {node.p_class} "
                     f"mass {node.mass}  ranks ({node.mult_rank},{node.nuc_rank})  {node.status}")
    print("\n".join(lines), file=sys.stderr)
    if args.check_conservation:
        for name, a, b, good in res.conservation:
            print(f"conservation {name}: {a} vs {b} {'ok' if good else 'FAIL'}", file=sys.stderr)
    led = _ledger(args)
    if led:
        led.append("tree", {"type": args.type, "max_order": args.max_order}, {
            "vertices": [(n.name, n.order_exponent, str(n.mass)) for n in res.nodes()],
            "conservation_ok": ok, "anomalies": out["anomalies"]},
            inputs=[args.root] if args.root else None)
    if args.check_conservation and not ok:
        return EXIT_PRECONDITION
    if res.budget_reports:
        return EXIT_CAPACITY
    return EXIT_OK


def cmd_braid(args) -> int:
    N = args.N or max(int(t) for t in re.findall(r"\d+", args.sigma))
    sigma = parse_permutation(args.sigma, N)
    if args.p == 2:
        raise BraidError("p = 2 is not supported: there is no choice of q making the "
                         "cyclotomic character surjective onto the 2-adic units")
    Qf = build_punctured_free(N, args.p, args.klass)
    rep = run_distribution(Qf, args.q, sigma, args.samples, args.seed, threads=args.threads)
    payload = rep.to_json()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=1, sort_keys=True))
    if args.csv:
        Path(args.csv).write_text(rep.to_csv())
    print(json.dumps(payload, indent=1, sort_keys=True))
    led = _ledger(args)
    if led:
        led.append("braid", {"p": args.p, "q": args.q, "sigma": args.sigma, "N": N,
                             "class": args.klass, "samples": args.samples},
                   {"histogram": rep.histogram}, seed=args.seed)
    return EXIT_OK


def cmd_census(args) -> int:
    bound = parse_number(args.bound)
    led = _ledger(args)
    if args.classifier == "ray5319":
        results = ray_census(bound, ledger=args.resume)
        hist = census_histogram(results)
        shapes_ok = all(len(v) == 2 and v[0] == 2 and v[1] >= 16 for v in results.values())
        payload = {"bound": bound, "primes": len(results),
                   "n_histogram": {str(k): v for k, v in hist.items()},
                   "shape_Z2xZ2^n_n>=4": shapes_ok}
        if args.csv:
            rows = [(5, r, "2:3mod8,5mod8", "ray5319", "x".join(map(str, inv)),
                     inv[-1].bit_length() - 1) for r, inv in sorted(results.items())]
            Path(args.csv).write_text(_csv_text(rows))
        print(json.dumps(payload, indent=1, sort_keys=True))
        if led:
            led.append("census", {"classifier": "ray5319", "bound": bound}, payload)
        return EXIT_OK
    lower = parse_number(args.lower) if args.lower else max(bound // 10, 2)
    rep, rows = census(args.classifier, (lower, bound), args.count, args.seed)
    payload = rep.to_json()
    if args.csv:
        _, spec, _ = CLASSIFIERS[args.classifier]
        Path(args.csv).write_text(_csv_text(
            [(q, r, spec, args.classifier, out.label, "") for (q, r), out in rows]))
    print(json.dumps(payload, indent=1, sort_keys=True))
    if led:
        led.append("census", {"classifier": args.classifier, "window": [lower, bound],
                              "count": args.count}, payload, seed=args.seed)
    return EXIT_OK


# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pgmass", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--ledger", help="append a record to this JSONL ledger")
    common.add_argument("--threads", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", parents=[common], help="inspect a pc-presented group")
    g.add_argument("action", choices=["show", "classes", "aut", "ab", "maxsub"])
    g.add_argument("file")
    g.set_defaults(func=cmd_group)

    m = sub.add_parser("mass", parents=[common], help="heuristic mass A_Z/|Aut|")
    m.add_argument("--type", required=True)
    m.add_argument("file")
    m.set_defaults(func=cmd_mass)

    t = sub.add_parser("tree", parents=[common], help="viable descendant tree")
    t.add_argument("--p", type=int)
    t.add_argument("--type", required=True)
    t.add_argument("--max-order", required=True)
    t.add_argument("--root", help="root group file (default: elementary abelian)")
    t.add_argument("--out", help="write tree JSON here")
    t.add_argument("--check-conservation", action="store_true")
    t.add_argument("--no-anomalies", action="store_true", help="skip quotient-anomaly search")
    t.add_argument("--extended", action="store_true", help="allow very large order bounds")
    t.set_defaults(func=cmd_tree)

    b = sub.add_parser("braid", parents=[common], help="braid Monte-Carlo")
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--q", type=int, required=True)
    b.add_argument("--sigma", required=True, help='cycle notation, e.g. "(1 2)(3 4)"')
    b.add_argument("--N", type=int, help="number of punctures (default: largest point)")
    b.add_argument("--class", dest="klass", type=int, default=2)
    b.add_argument("--samples", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="write report JSON here")
    b.add_argument("--csv", help="write histogram CSV here")
    b.set_defaults(func=cmd_braid)

    c = sub.add_parser("census", parents=[common], help="prime censuses")
    c.add_argument("--classifier", required=True, choices=sorted(CLASSIFIERS) + ["ray5319"])
    c.add_argument("--bound", required=True)
    c.add_argument("--lower", help="window start (default bound/10)")
    c.add_argument("--count", type=int, default=5000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--csv", help="write per-tuple CSV here")
    c.add_argument("--resume", help="JSONL file of finished primes (ray5319)")
    c.set_defaults(func=cmd_census)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (PresentationError, json.JSONDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CapacityError, RejectionCapError, CertificationError) as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, TypeSpecError, BraidError, PreconditionError, ValueError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
