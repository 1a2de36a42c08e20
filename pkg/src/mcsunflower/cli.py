"""Command-line entry point.

Exit status: 0 verified, 2 refuted (counterexample printed), 1 misuse.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import acceptance, constructions, matching, optimizer, partition, search, setfam
from .errors import DomainError, InconsistencyError, UsageError, VerificationError

EXIT_OK, EXIT_MISUSE, EXIT_REFUTED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_MISUSE, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _emit(payload: dict, fmt: str, text: str | None = None):
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    elif fmt == "csv":
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["key", "value"])
        for key in sorted(payload):
            val = payload[key]
            out.writerow([key, json.dumps(val) if isinstance(val, (dict, list)) else val])
        print(buf.getvalue(), end="")
    else:
        print(text if text is not None else "\n".join(f"{k}: {v}" for k, v in payload.items()))


def _load(path) -> setfam.FamilyTuple:
    try:
        obj = setfam.read_families(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if isinstance(obj, setfam.Family):
        obj = setfam.FamilyTuple((obj,))
    return obj


# ---------------------------------------------------------------------------
# commands; each returns an exit status


def cmd_sum_bound(args):
    value = setfam.s_formula(args.n, args.k)
    rep = constructions.sum_extremal(args.n, args.k)
    free = None
    if rep.tuple is not None and args.n <= args.certify_limit:
        free = setfam.is_sunflower_free(rep.tuple)
    ok = rep.total == value and free is not False
    payload = {"schema": 1, "n": args.n, "k": args.k, "s_formula": value,
               "construction_total": rep.total, "construction_certified": free,
               "status": "verified" if ok else "refuted"}
    _emit(payload, args.format, f"S({args.n},{args.k}) = {value}; construction total "
          f"{rep.total}, certified={free}")
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_search_sum(args):
    res = search.exhaustive_max_sum(args.n, args.k, budget=args.budget, threads=args.threads,
                                    use_level_bound=args.level_bound)
    payload = res.to_dict()
    ok = True
    if args.n >= args.k >= 3:
        formula = setfam.s_formula(args.n, args.k)
        payload["s_formula"] = formula
        ok = res.best_total == formula if res.proven_optimal else res.best_total <= formula
    payload["status"] = "verified" if ok else "refuted"
    text = (f"best total {res.best_total} (proven={res.proven_optimal}, "
            f"nodes={res.nodes_explored})\n" + setfam.format_families(res.witness_tuple))
    _emit(payload, args.format, text.rstrip("\n"))
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_uniform_bound(args):
    bound = setfam.uniform_bound(args.n, args.s, args.c, args.t, args.k)
    payload = {"schema": 1, "n": args.n, "s": args.s, "c": args.c, "t": args.t, "k": args.k,
               "uniform_bound": str(bound)}
    ok = True
    text = f"uniform bound {bound}"
    if args.search:
        res = search.exhaustive_max_sum_uniform(args.n, args.s, args.c, args.t, args.k,
                                                budget=args.budget, threads=args.threads)
        ok = res.best_total <= bound
        payload.update({"search_total": res.best_total, "proven_optimal": res.proven_optimal,
                        "witness": setfam.format_families(res.witness_tuple)})
        text += f"; search total {res.best_total} (proven={res.proven_optimal})"
    payload["status"] = "verified" if ok else "refuted"
    _emit(payload, args.format, text)
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_detect(args):
    ft = _load(args.families)
    if args.t is not None or args.c is not None:
        t = args.t if args.t is not None else ft.k
        if args.c is None:
            raise UsageError("--t requires --c for core-size restricted detection")
        witness = setfam.find_uniform_sunflower(ft, t, args.c)
    else:
        witness = setfam.find_multicolor_sunflower(ft)
    payload = {"schema": 1, "n": ft.n, "k": ft.k, "sizes": list(ft.sizes),
               "sunflower_free": witness is None}
    if witness is None:
        _emit(payload, args.format, "sunflower-free")
        return EXIT_OK
    payload["witness"] = {"core": setfam.elements_of(witness.core),
                          "sets": [setfam.elements_of(p) for p in witness.petalsets],
                          "families": list(witness.family_indices)}
    _emit(payload, args.format, "sunflower found\n" + witness.describe())
    return EXIT_REFUTED


CONSTRUCTIONS = ("sum", "product", "matching", "uniform")


def cmd_construct(args):
    if args.kind == "sum":
        rep = constructions.sum_extremal(args.n, args.k)
    elif args.kind == "product":
        rep = constructions.product_extremal(args.n, args.k)
    elif args.kind == "matching":
        if args.s is None or args.t is None:
            raise UsageError("--kind matching needs --s and --t")
        rep = constructions.tk_matching_extremal(args.s, args.t, args.k)
    else:
        if args.s is None:
            raise UsageError("--kind uniform needs --s")
        rep = constructions.uniform_tight(args.n, args.s, args.k)
    if args.out:
        if rep.tuple is None:
            raise UsageError(f"n={rep.n} is too large to write out")
        setfam.write_families(args.out, rep.tuple, hex_masks=args.hex)
    _emit(rep.to_dict(), args.format,
          f"{args.kind}: sizes {list(rep.sizes)}, total {rep.total}, product {rep.product}")
    return EXIT_OK


def cmd_graphs_verify(args):
    res = matching.verify_structure_lemma()
    payload = res.to_dict()
    payload["templates"] = {name: list(matching.graph_stats(g)[:2])
                            for name, g in matching.TEMPLATES.items()}
    text = f"{res.scanned} graphs scanned, {res.qualifying} qualifying, max m2+t = {res.max_statistic}"
    if not res:
        text += f"\nFAILED: {res.reason}\n{res.counterexample.to_text()}"
    _emit(payload, args.format, text)
    return EXIT_OK if res else EXIT_REFUTED


def cmd_expectation(args):
    ft = _load(args.families)
    exact = partition.exact_pq_expectation(ft, check_bound=False)
    report = exact
    if args.samples:
        mc = partition.mc_pq_expectation(ft, args.samples, args.seed, threads=args.threads)
        report = partition.ExpectationReport(
            exact.exact_value, exact.enumerated_value, mc.mc_estimate, mc.mc_stderr,
            mc.sample_count, mc.seed, False)
    free = len(ft.common()) == 0 and setfam.is_sunflower_free(ft)
    refuted = free and exact.exact_value > partition.PQ_BOUND
    payload = report.to_dict()
    payload["bound_checked"] = free
    payload["status"] = "refuted" if refuted else "verified"
    text = f"E(P+Q) = {exact.exact_value} ({float(exact.exact_value):.6f})"
    if report.mc_estimate is not None:
        text += f"; MC {report.mc_estimate:.6f} +- {report.mc_stderr:.6f} (n={args.samples})"
    if refuted:
        text += f"\nbound {partition.PQ_BOUND} exceeded by a sunflower-free tuple"
    _emit(payload, args.format, text)
    return EXIT_REFUTED if refuted else EXIT_OK


def cmd_optimize(args):
    try:
        rep = optimizer.solve_global(args.tol, starts=args.starts)
    except InconsistencyError as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return EXIT_REFUTED
    payload = rep.to_dict()
    payload["product_upper_scaled"] = optimizer.product_upper_scaled(args.tol)
    ok = rep.constraint_check
    if args.format == "text":
        print(f"{rep.case_label}: value {rep.value:.6f} at {rep.point.rounded()}")
        print(f"residual {rep.residual:.3g}, upper coefficient {payload['product_upper_scaled']}")
    else:
        _emit(payload, args.format)
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_report(args):
    rows = acceptance.run_all(args.only)
    print(acceptance.format_rows(rows, args.format, timings=not args.no_timing))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_REFUTED


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    common.set_defaults(format="text")
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument("--seed", type=_nonneg, default=0)

    parser = _Parser(prog="mcsunflower", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sum-bound", parents=[common], help="closed-form S(n,k) and its construction")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_positive, default=3)
    p.add_argument("--certify-limit", type=_nonneg, default=10,
                   help="run the detector on the construction up to this n")
    p.set_defaults(run=cmd_sum_bound)

    p = sub.add_parser("search-sum", parents=[common], help="exhaustive maximum total size")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_positive, default=3)
    p.add_argument("--budget", type=_positive, default=search.DEFAULT_BUDGET)
    p.add_argument("--level-bound", action="store_true",
                   help="prune with the per-layer uniform bounds")
    p.set_defaults(run=cmd_search_sum)

    p = sub.add_parser("uniform-bound", parents=[common], help="bound for uniform families")
    for name in ("n", "s", "t", "k"):
        p.add_argument(f"--{name}", type=_positive, required=True)
    p.add_argument("--c", type=_nonneg, required=True)
    p.add_argument("--search", action="store_true", help="also run the exhaustive search")
    p.add_argument("--budget", type=_positive, default=search.DEFAULT_BUDGET)
    p.set_defaults(run=cmd_uniform_bound)

    p = sub.add_parser("detect", parents=[common], help="look for a multicolor sunflower")
    p.add_argument("--families", required=True)
    p.add_argument("--t", type=_positive)
    p.add_argument("--c", type=_nonneg)
    p.set_defaults(run=cmd_detect)

    p = sub.add_parser("construct", parents=[common], help="build an extremal construction")
    p.add_argument("--kind", choices=CONSTRUCTIONS, default="sum")
    p.add_argument("--n", type=_positive, default=0)
    p.add_argument("--k", type=_positive, default=3)
    p.add_argument("--s", type=_positive)
    p.add_argument("--t", type=_positive, help="petal count m for --kind matching")
    p.add_argument("--out", help="write the families to this file")
    p.add_argument("--hex", action="store_true", help="write sets as hex masks")
    p.set_defaults(run=cmd_construct)

    p = sub.add_parser("graphs-verify", parents=[common], help="check the 3x3 structure lemma")
    p.set_defaults(run=cmd_graphs_verify)

    p = sub.add_parser("expectation", parents=[common], help="E(P+Q) for a family triple")
    p.add_argument("--families", required=True)
    p.add_argument("--samples", type=_nonneg, default=0, help="Monte Carlo samples (0: exact only)")
    p.set_defaults(run=cmd_expectation)

    p = sub.add_parser("optimize", parents=[common], help="solve the scaled product program")
    p.add_argument("--tol", type=_positive_float, default=optimizer.DEFAULT_TOL)
    p.add_argument("--starts", type=_positive, default=1024)
    p.set_defaults(run=cmd_optimize)

    p = sub.add_parser("report", parents=[common], help="run every acceptance check")
    p.add_argument("--only", type=_positive, nargs="+", help="criterion ids to run")
    p.add_argument("--no-timing", action="store_true", help="report 0 ms for byte-stable output")
    p.set_defaults(run=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISUSE
    except VerificationError as exc:
        print(f"refuted: {exc}", file=sys.stderr)
        if exc.counterexample is not None:
            ce = exc.counterexample
            print(setfam.format_families(ce) if isinstance(ce, setfam.FamilyTuple) else ce)
        return EXIT_REFUTED


if __name__ == "__main__":
    sys.exit(main())
