"""Command-line interface: ``conecert {certify,table,product,minimal-orbit}``.

Exit codes: 0 for CERTIFIED or NUMERICALLY_SUPPORTED, 2 for INCONCLUSIVE,
3 for FAILED (and for products whose hypotheses are not met), 64 for usage
errors and 70 for pipeline errors.
"""
from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .catalog import parse_mult
from .certify import summarize
from .errors import ConeCertError, ProductError
from .orbit import describe_ambient, minimal_point
from .pipeline import MODES, evaluate_table, run_certify
from .product import check_numeric, compose
from .report import dumps, factor_from_dict, load_report, product_to_dict, run_to_dict, write_text
from .rootdata import build_root_system, delta_label, parse_delta, parse_type
from .verdict import Verdict

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_FAILED, EXIT_USAGE, EXIT_PIPELINE = 0, 2, 3, 64, 70

_EXIT = {
    Verdict.CERTIFIED: EXIT_OK,
    Verdict.NUMERICALLY_SUPPORTED: EXIT_OK,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    Verdict.FAILED: EXIT_FAILED,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text, out):
    if out and out != "-":
        write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_certify(args) -> int:
    t0 = time.perf_counter()
    run = run_certify(
        type_label=args.type,
        rank=args.rank,
        mult=args.mult,
        delta=args.delta,
        threshold=args.threshold,
        vary=tuple(v.strip() for v in args.vary.split(",") if v.strip()) if args.vary else None,
        ansatz_path=args.ansatz,
        mode=args.mode,
        grid=args.grid,
        search=args.search,
    )
    if args.timings:
        run.report.timings["total"] = time.perf_counter() - t0
    doc = run_to_dict(run, timings=args.timings, dump=args.dump)
    text = dumps(doc)
    if args.out:
        write_text(args.out, text)
    if args.json:
        sys.stdout.write(text)
    else:
        print(summarize(run.report))
        print(f"orbit dimension {run.orbit_dim}, sphere dimension {run.sphere_dim}")
        for note in doc["notes"]:
            print(f"note: {note}")
    return _EXIT[run.verdict]


def _markdown(rows) -> str:
    head = "| type | symmetric pair | mult. | A_i | dims | printed | area-min. | printed | check |"
    lines = [head, "|" + "---|" * 9]
    for r in rows:
        mult = ", ".join(f"{k}={v}" for k, v in r["multiplicities"].items())
        mark = r["mark"].replace("O", "◯")
        printed = r["printed_mark"].replace("O", "◯")
        checks = [r["flag"]] if r["flag"] else []
        if not r["mark_match"]:
            checks.append("MARK MISMATCH")
        if "numeric_max_j" in r:
            checks.append(f"numeric max J {r['numeric_max_j']:.6f}")
        lines.append(
            f"| {r['type']} | {r['pair']} | {mult} | {r['orbit']} | {r['dims']} | {r['printed_dims']}"
            f" | {mark} | {printed} | {'; '.join(checks) or 'ok'} |"
        )
    return "\n".join(lines) + "\n"


def cmd_table(args) -> int:
    rows = evaluate_table(numeric=not args.no_numeric, grid=args.grid)
    if args.out:
        write_text(args.out, dumps({"schema": 1, "kind": "table", "rows": rows}))
    sys.stdout.write(dumps({"schema": 1, "kind": "table", "rows": rows}) if args.json else _markdown(rows))
    return EXIT_OK


def cmd_product(args) -> int:
    left_doc, right_doc = load_report(args.left), load_report(args.right)
    try:
        left, right = factor_from_dict(left_doc), factor_from_dict(right_doc)
        case = compose(left, right)
    except ProductError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_FAILED
    if args.grid:
        result = check_numeric(case, args.grid)
        if result.verdict is Verdict.FAILED:
            case.verdict = Verdict.FAILED
            case.notes.append("numeric search contradicts the product theorem")
    text = dumps(product_to_dict(case, left_doc, right_doc))
    if args.out:
        write_text(args.out, text)
    if args.json:
        sys.stdout.write(text)
    else:
        a1, a2 = case.a
        print(f"product {case.label}: k = {case.k}, a = ({a1:.17g}, {a2:.17g})")
        if case.numeric is not None:
            print(f"numeric max J = {case.numeric.max_j:.17g} on grid {case.numeric.grid_n}")
        print(f"verdict {case.verdict.value}")
    return _EXIT[case.verdict]


def cmd_minimal_orbit(args) -> int:
    if args.type is None:
        raise UsageError("--type is required")
    label = args.type if args.rank is None else f"{args.type}{args.rank}"
    family, rank = parse_type(label)
    mult = parse_mult(args.mult, f"{family}{rank}")
    rs = build_root_system(family, rank, mult)
    delta = parse_delta(args.delta, rank)
    point = minimal_point(rs, delta)
    doc = {
        "schema": 1,
        "kind": "minimal-orbit",
        "system": rs.label,
        "multiplicities": {c: str(m) for c, m in rs.multiplicities},
        "delta": delta_label(delta),
        "coords": list(point.coords),
        "ambient": list(point.ambient),
        "closed_form": describe_ambient(rs, point),
        "residual": point.residual,
        "exact": point.is_exact,
    }
    if point.is_exact:
        doc["exact_direction"] = [str(c) for c in point.exact_direction]
    text = dumps(doc)
    if args.out:
        write_text(args.out, text)
    if args.json:
        sys.stdout.write(text)
    else:
        print(f"A = {doc['closed_form']}")
        print("chamber coords: " + ", ".join(f"x{i + 1} = {c:.17g}" for i, c in enumerate(point.coords)))
        print(f"tangential mean curvature {point.residual:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="conecert", description="Certify area-minimizing cones over orbits of s-representations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def system_args(p, delta_required=False):
        p.add_argument("--type", help="root system, e.g. A2, BC2, G2 (or a family with --rank)")
        p.add_argument("--rank", type=int)
        p.add_argument("--mult", help="multiplicities: '2', '1,2' or 'm1=1,m2=n' (symbols allowed)")
        p.add_argument("--delta", required=delta_required, help="face of the chamber, e.g. a1 or a1,a3")
        p.add_argument("--out", help="write the JSON report to this path")
        p.add_argument("--json", action="store_true", help="print JSON instead of a summary")

    c = sub.add_parser("certify", help="certify J <= 1 for one orbit")
    system_args(c)
    c.add_argument("--threshold", type=int, help="bound t in sum of varying multiplicities >= t")
    c.add_argument("--vary", help="comma-separated multiplicity parameters in the threshold")
    c.add_argument("--ansatz", help="ansatz file")
    c.add_argument("--search", action="store_true", help="search for an ansatz when none is built in")
    c.add_argument("--mode", choices=MODES, default="symbolic")
    c.add_argument("--grid", type=int, default=400, help="grid resolution per axis for the numeric check")
    c.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    c.add_argument("--dump", action="store_true", help="include certificate polynomials in the report")
    c.set_defaults(func=cmd_certify)

    t = sub.add_parser("table", help="recompute the rank-two table")
    t.add_argument("--grid", type=int, default=400)
    t.add_argument("--no-numeric", action="store_true", help="skip numeric maxima for blank cells")
    t.add_argument("--out")
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_table)

    p = sub.add_parser("product", help="compose two certified reports")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--grid", type=int, default=0, help="also run the numeric check at this resolution")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_product)

    m = sub.add_parser("minimal-orbit", help="base point of the minimal orbit through a face")
    system_args(m, delta_required=True)
    m.set_defaults(func=cmd_minimal_orbit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConeCertError as exc:
        code = EXIT_USAGE if exc.code in {"USAGE", "BAD_MULT", "BAD_DELTA", "BAD_TYPE", "BAD_THRESHOLD"} else EXIT_PIPELINE
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
