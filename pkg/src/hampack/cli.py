"""Command-line entry point: ``hampack <command> ...``."""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import branch, code as codes, model as models
from .solver import SolveBudget, Status, default_threads, solve, solve_forced
from .space import MarginalProfile, SpaceError, parse_space

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_FAIL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _space(args):
    try:
        return parse_space(args.space)
    except SpaceError as exc:
        raise UsageError(f"--space: {exc}") from None


def _word(space, text, flag):
    try:
        return space.word(text)
    except SpaceError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _profile(space, text):
    try:
        printed = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--profile: expected comma-separated integers, got {text!r}") from None
    if len(printed) != space.s:
        raise UsageError(f"--profile needs {space.s} entries (largest alphabet first)")
    return MarginalProfile(tuple(reversed(printed)))


def _budget(args):
    seconds = None if args.unbounded else args.budget
    return SolveBudget(seconds=seconds, nodes=args.nodes, initial_lower=args.lower,
                       threads=args.threads or default_threads(), progress=True)


def _print_result(res, args):
    print(res.to_json())
    print(f"value {res.best_value}  bound {res.upper_bound}  status {res.status.value}  "
          f"nodes {res.node_count}  time {res.elapsed:.2f}s")
    if getattr(args, "json", None):
        Path(args.json).write_text(res.to_json() + "\n")
    return EXIT_BUDGET if res.status is Status.BUDGET else EXIT_OK


def cmd_solve(args):
    space = _space(args)
    budget = _budget(args)
    if args.force:
        forced = [_word(space, w, "--force") for w in args.force.split(",")]
        res = solve_forced(models.build_full(space, args.d), forced, budget)
        if res.status is Status.INFEASIBLE:
            print(res.to_json())
            print("forced words are closer than d: infeasible")
            return EXIT_FAIL
    elif args.second:
        try:
            m = models.build_pair(space, args.d, _word(space, args.second, "--second"))
        except models.ModelError as exc:
            raise UsageError(str(exc)) from None
        res = solve(m, budget)
    else:
        res = branch.packing_number(space, args.d, budget)
    return _print_result(res, args)


def _build(space, args):
    kind = args.model
    if kind == "full":
        return models.build_full(space, args.d)
    if kind == "zero":
        return models.build_zero_fixed(space, args.d)
    if kind == "reduced":
        return models.build_reduced(space, args.d)
    if kind == "pair":
        if not args.second:
            raise UsageError("--model pair needs --second")
        return models.build_pair(space, args.d, _word(space, args.second, "--second"))
    if not args.profile:
        raise UsageError("--model forbid needs --profile")
    return models.build_profile_forbidding(space, args.d, _profile(space, args.profile))


def cmd_emit(args):
    space = _space(args)
    try:
        m = _build(space, args)
    except models.ModelError as exc:
        raise UsageError(str(exc)) from None
    include_fixed = args.include_fixed or args.model == "zero"
    sink = args.output if args.output != "-" else sys.stdout
    size = models.emit(m, args.format, sink, include_fixed=include_fixed)
    stats = models.model_stats(m)
    print(f"{args.model} model: {stats.free} binary variables, {stats.conflicts} conflict rows, "
          f"offset {m.objective_offset}, {size} bytes", file=sys.stderr)
    return EXIT_OK


def _read_code(space, args):
    try:
        return codes.read_code(space, args.code)
    except (codes.CodeError, OSError) as exc:
        raise UsageError(str(exc)) from None


def cmd_verify(args):
    space = _space(args)
    report = codes.verify(_read_code(space, args), args.d)
    print(json.dumps(report.to_dict(), indent=2))
    print(f"{'PASS' if report.passed else 'FAIL'}: {report.cardinality} words, "
          f"min distance {report.min_distance}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_connectify(args):
    space = _space(args)
    code = _read_code(space, args)
    try:
        out = codes.connectify(code, args.d, seed=args.seed)
    except codes.CodeError as exc:
        raise UsageError(str(exc)) from None
    codes.write_code(out, args.output, header=f"connectified, space {space}, d={args.d}")
    connected = codes.is_connected(codes.contact_graph(out, args.d))
    print(f"{len(out)} words written to {args.output}; contact graph connected: {connected}")
    return EXIT_OK


def cmd_branches(args):
    space = _space(args)
    for br in branch.enumerate_branches(space, args.d):
        print(f"{','.join(map(str, br.profile.printed()))}\t{br.word}")
    return EXIT_OK


def cmd_audit(args):
    space = _space(args)
    res = branch.audit_branch(space, args.d, _profile(space, args.profile), args.known_lower,
                              _budget(args))
    print(json.dumps({"verdict": res.verdict, "reason": res.reason, "bound": res.bound}))
    return EXIT_OK if res.unavoidable else EXIT_BUDGET if res.reason == "budget" else EXIT_FAIL


def _range(text, flag):
    try:
        lo, _, hi = text.partition("-")
        return range(int(lo), int(hi or lo) + 1)
    except ValueError:
        raise UsageError(f"{flag}: bad range {text!r}") from None


def cmd_bounds(args):
    if args.anchors:
        ledger = branch.read_anchors(args.anchors)
    else:
        ledger = branch.BoundLedger()
        for key, value in branch.ANCHORS.items():
            ledger.add(key, value, value)
    rules = [r for r in args.rules.split(",") if r]
    unknown = set(rules) - set(branch.RULES)
    if unknown:
        raise UsageError(f"unknown rules {sorted(unknown)}")
    bs, _, ts = args.grid.partition("x")
    ds = [int(v) for v in args.d.split(",")]
    ledger = branch.propagate_bounds(ledger, rules, _range(bs, "--grid"), _range(ts, "--grid"),
                                     range(min(ds), max(ds) + 1))
    t_range = _range(ts, "--grid")
    for d in ds:
        published = {"3": branch.TABLE3, "4": branch.TABLE4}.get(str(d), {})
        print(f"upper bounds, d={d}")
        print("b\\t " + "".join(f"{t:>8}" for t in t_range))
        for b in _range(bs, "--grid"):
            cells = []
            for t in t_range:
                u = ledger.upper(b, t, d)
                mark = "*" if (b, t) in published else " "
                cells.append(f"{'' if u is None else u:>7}{mark}")
            print(f"{b:<4} " + "".join(cells))
    if args.output:
        Path(args.output).write_text("\n".join(ledger.lines()) + "\n")
    bad = 0
    for d, table in ((3, branch.TABLE3), (4, branch.TABLE4)):
        if d not in ds:
            continue
        for (b, t), (new, _) in sorted(table.items()):
            got = ledger.upper(b, t, d)
            ok = got == new
            bad += not ok
            print(f"{'PASS' if ok else 'FAIL'} N({b},{t};{d}) <= {new}: got {got}")
    return EXIT_OK if not bad else EXIT_FAIL


def cmd_tables(args):
    budget = SolveBudget(seconds=args.budget, threads=1)
    report = branch.reproduce_tables(budget)
    print(report.text())
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hampack",
                                description="Mixed Hamming packing models, solver and bounds")
    p.add_argument("--seed", type=int, default=None, help="seed for any random choice")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_d=True):
        sp.add_argument("--space", required=True, help="e.g. 2^7,3^1")
        if need_d:
            sp.add_argument("-d", type=int, required=True, help="minimum distance")

    def solving(sp):
        sp.add_argument("--budget", type=float, default=600.0, help="wall-clock seconds")
        sp.add_argument("--unbounded", action="store_true", help="no time limit")
        sp.add_argument("--nodes", type=int, default=None, help="node limit")
        sp.add_argument("--lower", type=int, default=None,
                        help="known attainable value; only better solutions are sought")
        sp.add_argument("--threads", type=int, default=None, help="worker processes")

    sp = sub.add_parser("solve", help="exact packing number (or a forced / pair variant)")
    common(sp)
    solving(sp)
    sp.add_argument("--force", help="comma-separated words that must be selected")
    sp.add_argument("--second", help="solve only the pair model with this second word")
    sp.add_argument("--json", help="also write the JSON report here")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("emit", help="write a model in LP or MPS format")
    common(sp)
    sp.add_argument("--model", choices=["full", "zero", "reduced", "pair", "forbid"],
                    required=True)
    sp.add_argument("--second")
    sp.add_argument("--profile", help="differences per block, largest alphabet first")
    sp.add_argument("--format", choices=["lp", "mps"], default="lp")
    sp.add_argument("--include-fixed", action="store_true",
                    help="emit fixed words as equality rows")
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_emit)

    sp = sub.add_parser("verify", help="check the minimum distance of a code file")
    common(sp)
    sp.add_argument("--code", required=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("connectify", help="make the contact graph of a code connected")
    common(sp)
    sp.add_argument("--code", required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_connectify)

    sp = sub.add_parser("branches", help="list canonical second words")
    common(sp)
    sp.set_defaults(func=cmd_branches)

    sp = sub.add_parser("audit", help="test whether a contact profile is unavoidable")
    common(sp)
    solving(sp)
    sp.add_argument("--profile", required=True)
    sp.add_argument("--known-lower", type=int, required=True)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("bounds", help="propagate binary/ternary upper bounds")
    sp.add_argument("--anchors", help="anchor file; defaults to the two solved values")
    sp.add_argument("--rules", default="ii,iv,vi")
    sp.add_argument("--grid", default="1-10x0-5", help="b-range x t-range")
    sp.add_argument("-d", default="3,4", help="comma-separated distances")
    sp.add_argument("-o", "--output", help="write the ledger here")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("tables", help="reproduce the counterexample and bound tables")
    sp.add_argument("--budget", type=float, default=None)
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_tables)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.seed is not None:
        random.seed(args.seed)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
