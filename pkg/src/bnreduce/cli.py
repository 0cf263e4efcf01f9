"""Command-line front end.

Exit status: 0 on success, 1 for invalid input (bad flags, malformed files,
sets that are not dominant, size limits), 2 when a proven bound or an
internal consistency check fails. Diagnostics go to stderr prefixed with
``error:`` or ``bound-violation:``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import clover as clv
from .dominance import dominance_report, minimum_dominant_sets
from .ensemble import run_grid, stats_to_csv
from .errors import BnReduceError, BoundViolation
from .induced import (
    build_induced,
    conjugacy,
    parse_induced,
    serialize_induced,
    verify_injective_on_periodics,
)
from .landscape import (
    analyze,
    check_bounds,
    extremal_chain_network,
    extremal_cycle_network,
    extremal_debruijn_network,
    transition_diagram,
)
from .netcore import parse_network, serialize_network


class UsageError(Exception):
    """Invalid command line; reported with exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument helpers


def _id_list(text: str) -> tuple:
    try:
        ids = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated vertex ids, got {text!r}") from None
    if not ids:
        raise argparse.ArgumentTypeError("empty vertex set")
    return ids


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or comma-separated numbers, got {text!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _render(obj, fmt: str) -> str:
    return obj.to_csv() if fmt == "csv" else obj.to_text()


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires {', '.join(missing)}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_dominant(args) -> int:
    net = parse_network(_read(args.net))
    if args.minimal == (args.set is not None):
        raise UsageError("dominant needs exactly one of --set or --minimal")
    if args.set is not None:
        _emit(_render(dominance_report(net, args.set), args.format), args.out)
        return 0
    sets = minimum_dominant_sets(net)
    if args.format == "csv":
        text = "set\n" + "".join(" ".join(map(str, s)) + "\n" for s in sets)
    else:
        text = f"minimum dominant sets (size {len(sets[0])}): {len(sets)}\n"
        text += "".join("{" + ",".join(map(str, s)) + "}\n" for s in sets)
    _emit(text, args.out)
    return 0


def cmd_induce(args) -> int:
    _require(args, "set")
    net = parse_network(_read(args.net))
    _emit(serialize_induced(build_induced(net, args.set)), args.out)
    return 0


def cmd_landscape(args) -> int:
    text = _read(args.net)
    if text.lstrip().startswith("inducednet"):
        system = parse_induced(text)
    else:
        system = parse_network(text)
        if args.set is not None:
            system = build_induced(system, args.set)
    _emit(_render(analyze(transition_diagram(system)), args.format), args.out)
    return 0


def cmd_verify(args) -> int:
    _require(args, "set")
    net = parse_network(_read(args.net))
    conj = conjugacy(net, args.set)
    semi = bool(np.array_equal(conj.induced_successors[conj.h], conj.h[conj.network_successors]))
    injective = verify_injective_on_periodics(net, args.set)
    if not semi or not injective:
        what = "semiconjugacy" if not semi else "injectivity on periodic points"
        print(f"bound-violation: {what} fails", file=sys.stderr)
        return 2
    report = check_bounds(conj.network_landscape(), conj.induced_landscape(), conj.h,
                          len(conj.vertices), conj.depth, conj.ell)
    if args.format == "csv":
        text = report.to_csv()
    else:
        text = "semiconjugacy: OK\ninjective on periodic points: OK\n" + report.to_text()
    _emit(text, args.out)
    failed = report.failures()
    if failed:
        print("bound-violation: " + ", ".join(c.clause for c in failed), file=sys.stderr)
        return 2
    return 0


def cmd_clover_gen(args) -> int:
    _require(args, "n", "p", "q", "seed")
    rng = np.random.default_rng(args.seed)
    clover = clv.assign_signs(clv.generate_clover(args.n, args.p[0], rng), args.q[0], rng)
    _emit(clv.serialize_clover(clover), args.out)
    return 0


def cmd_ensemble(args) -> int:
    _require(args, "n", "p", "q", "runs", "seed")
    runlog = open(args.runlog, "w") if args.runlog else None
    try:
        cells = run_grid(args.n, args.p, args.q, args.runs, args.seed, args.workers, runlog)
    finally:
        if runlog is not None:
            runlog.close()
    _emit(stats_to_csv(cells, verbose=args.verbose), args.out)
    return 0


def cmd_extremal(args) -> int:
    if args.kind == "cycle":
        _require(args, "period")
        net = extremal_cycle_network(args.period)
    elif args.kind == "debruijn":
        _require(args, "ell")
        net = extremal_debruijn_network(args.ell)
    else:
        _require(args, "n")
        net = extremal_chain_network(args.n)
    _emit(serialize_network(net), args.out)
    return 0


def cmd_analytic(args) -> int:
    rows = []
    if args.q is not None:
        ells = [args.ell] if args.ell is not None else range(1, 7)
        for q in args.q:
            rows += [("eta", f"L={L} q={q:g}", clv.eta(L, q)) for L in ells]
    if args.n is not None and args.p is not None:
        for p in args.p:
            tag = f"n={args.n} p={p:g}"
            rows.append(("expected_num_cycles", tag, clv.expected_num_cycles(args.n, p)))
            for L, w in clv.first_cycle_length_distribution(args.n, p).items():
                rows.append(("first_cycle_length_pmf", f"{tag} L={L}", w))
            rows.append(("expected_first_cycle_length", tag, clv.expected_first_cycle_length(args.n, p)))
            rows.append(("first_cycle_length_limit", f"p={p:g}", clv.first_cycle_length_limit(p)))
            if args.n >= 3:
                est = clv.expected_max_cycle_length(args.n, p)
                rows.append(("expected_max_cycle_length_finite_sum", tag, est.finite_sum))
                rows.append(("expected_max_cycle_length_asymptotic", tag, est.asymptotic))
    if not rows:
        raise UsageError("analytic needs --q (for eta) and/or --n with --p")
    if args.format == "csv":
        text = "quantity,arguments,value\n" + "".join(f"{a},{b},{c:.10g}\n" for a, b, c in rows)
    else:
        text = "".join(f"{a} [{b}]: {c:.6f}\n" for a, b, c in rows)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bnreduce", description="Dominant-set reduction of Boolean networks.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_text, *flags):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        for flag in flags:
            flag(p)
        p.add_argument("--out", metavar="PATH", help="write the result here instead of stdout")
        return p

    def net(p):
        p.add_argument("--net", metavar="PATH", required=True, help="network file (boolnet format)")

    def uset(p):
        p.add_argument("--set", metavar="IDS", type=_id_list, help="dominant set, e.g. 1,2")

    def fmt(p):
        p.add_argument("--format", choices=("text", "csv"), default="text", help="output format (default text)")

    def n(p):
        p.add_argument("--n", type=int, metavar="INT", help="number of vertices")

    def pq(p):
        p.add_argument("--p", type=_float_list, metavar="FLOAT", help="folding probability (comma list allowed)")
        p.add_argument("--q", type=_float_list, metavar="FLOAT", help="inhibition probability (comma list allowed)")

    def seed(p):
        p.add_argument("--seed", type=int, metavar="INT", help="master seed (required)")

    def minimal(p):
        p.add_argument("--minimal", action="store_true", help="list every minimum dominant set")

    add("dominant", cmd_dominant, "Report a dominant set or list the minimum ones.", net, uset, minimal, fmt)
    add("induce", cmd_induce, "Write the induced automata network of a dominant set.", net, uset)
    add("landscape", cmd_landscape,
        "Attractor landscape of a network, of its induced system (--set), or of an inducednet file.",
        net, uset, fmt)
    add("verify", cmd_verify, "Check the conjugacy and landscape bounds for a dominant set.", net, uset, fmt)
    add("clover-gen", cmd_clover_gen, "Generate a random signed clover network.", n, pq, seed)

    def ensemble_flags(p):
        p.add_argument("--runs", type=int, metavar="INT", help="runs per (p, q) cell")
        p.add_argument("--workers", type=int, default=1, metavar="INT", help="worker processes (default 1)")
        p.add_argument("--verbose", action="store_true", help="also emit basin-pooled averages")
        p.add_argument("--runlog", metavar="PATH", help="write one JSON line per run")

    add("ensemble", cmd_ensemble, "Monte Carlo statistics over random signed clovers.", n, pq, seed, ensemble_flags)

    def extremal_flags(p):
        p.add_argument("kind", choices=("cycle", "debruijn", "chain"), help="network family")
        p.add_argument("--period", type=int, metavar="INT", help="cycle length (cycle)")
        p.add_argument("--ell", type=int, metavar="INT", help="recurrence length (debruijn)")

    add("extremal", cmd_extremal, "Write a network that attains one of the landscape bounds.", extremal_flags, n)

    def analytic_flags(p):
        p.add_argument("--ell", type=int, metavar="INT", help="cycle length L for eta (default 1..6)")

    add("analytic", cmd_analytic, "Closed-form ensemble quantities.", n, pq, analytic_flags, fmt)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BoundViolation as exc:
        print(f"bound-violation: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"error: internal: {exc}", file=sys.stderr)
        return 2
    except (BnReduceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
