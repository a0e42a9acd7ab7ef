"""``gur`` command-line front end.

Exit codes: 0 success or match, 1 mismatch against golden expectations,
2 usage error (unknown rule, bad parameter, unknown counterexample).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import checks, experiments
from .checks import CheckConfig
from .rules import RULE_NAMES, get_rule

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _dims(text: str) -> list[int]:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --dims value {text!r}; expected e.g. 2,3") from None
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"bad --dims value {text!r}")
    return dims


def _default_seed() -> int:
    raw = os.environ.get("GUR_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"GUR_SEED must be an integer, got {raw!r}") from None


def _config(args) -> CheckConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    kwargs = {"seed": seed}
    if args.trials is not None:
        kwargs["trials"] = args.trials
    if args.tol is not None:
        kwargs["tol"] = args.tol
    if args.dims:
        kwargs["dims"] = args.dims
    try:
        return CheckConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _rule(args):
    try:
        return get_rule(args.rule, **{"lambda": args.lam, "mu": args.mu})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _results_markdown(results) -> str:
    lines = ["| check | verdict | scope | trials | witness distance |", "|---|---|---|---|---|"]
    for r in results:
        dist = "" if r.witness is None else f"{r.witness.distance:.3e}"
        lines.append(f"| {r.check} | {r.verdict} | {r.scope} | {r.trials_run} | {dist} |")
    return "\n".join(lines)


def cmd_check(args) -> int:
    rule = _rule(args)
    cfg = _config(args)
    golden = None
    if args.expect:
        golden = experiments.load_golden(int(args.expect[-1]))
        if rule.name not in golden["columns"]:
            raise UsageError(f"rule {rule.name!r} is not a column of {args.expect}")
    if args.only:
        names = [n.strip() for n in args.only.split(",") if n.strip()]
    elif golden is not None:
        names = list(golden["rows"])
    else:
        names = list(checks.CHECKS)
    unknown = [n for n in names if n not in checks.CHECKS]
    if unknown:
        raise UsageError(f"unknown check(s) {', '.join(unknown)}; known: {', '.join(checks.CHECKS)}")
    results = checks.run_all(rule, cfg, names)
    mismatches = []
    if golden is not None:
        for res in results:
            want = golden["cells"].get(res.check, {}).get(rule.name)
            if want is not None and want != experiments.glyph(res):
                mismatches.append(f"{res.check}: expected {want}, got {experiments.glyph(res)}")
    if args.format == "md":
        _emit(args, _results_markdown(results))
    else:
        _emit(args, _dump([r.to_dict() for r in results]))
    for m in mismatches:
        print(f"mismatch: {m}", file=sys.stderr)
    return EXIT_MISMATCH if mismatches else EXIT_OK


def cmd_table(args) -> int:
    cfg = _config(args)
    report = experiments.reproduce_table1(cfg) if args.number == 1 else experiments.reproduce_table2(cfg)
    _emit(args, report.to_markdown() if args.format == "md" else report.to_json())
    print(f"table {args.number}: {len(report.rows) * len(report.columns)} cells in {report.runtime:.1f}s",
          file=sys.stderr)
    try:
        golden = experiments.load_golden(args.number, args.golden)
    except (OSError, ValueError) as exc:
        print(f"cannot read golden data: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    mismatches = experiments.compare(report, golden)
    for m in mismatches:
        print(f"mismatch: {m}", file=sys.stderr)
    return EXIT_MISMATCH if mismatches else EXIT_OK


def cmd_counterexample(args) -> int:
    try:
        record = experiments.counterexample(args.name, mu=args.mu if args.mu is not None else 0.5)
    except experiments.UnknownCounterexampleError as exc:
        raise UsageError(exc.args[0]) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "md":
        lines = [f"## {record.name}", "", f"distance to expected: {record.distance:.3e}",
                 f"separation of the two sides: {record.separation:.6f}", "",
                 "lhs:", str(record.computed[0].real.round(6)), "", "rhs:", str(record.computed[1].real.round(6))]
        _emit(args, "\n".join(lines))
    else:
        _emit(args, _dump(record.to_dict()))
    return EXIT_OK if record.matches else EXIT_MISMATCH


def cmd_chsh(args) -> int:
    rule = _rule(args)
    report = experiments.chsh_report(rule, _config(args))
    if report.order_dependent:
        print(f"warning: {rule.name} is order dependent; reporting both orderings", file=sys.stderr)
    if args.format == "md":
        text = f"{report.rule}: S = {report.value:.6f}"
        if report.order_dependent:
            text += f" (Alice first), S = {report.reversed_value:.6f} (Bob first)"
        _emit(args, text)
    else:
        _emit(args, _dump(report.to_dict()))
    return EXIT_OK


def _common(p: argparse.ArgumentParser, rule: bool = False) -> None:
    if rule:
        p.add_argument("--rule", required=True, help=f"one of {', '.join(RULE_NAMES)}; parameters as lambda:0.25")
        p.add_argument("--lambda", dest="lam", type=float, help="lambda for the lambda and cc-lambda rules")
    p.add_argument("--mu", type=float, help="mixing weight for the mu rule")
    p.add_argument("--dims", type=_dims, action="append", help="comma-separated subsystem dimensions; repeatable")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="defaults to $GUR_SEED, else 0")
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("json", "md"), default="json")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gur", description="Certify properties of quantum state-update rules.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run property checks on one rule")
    _common(p, rule=True)
    p.add_argument("--only", help="comma-separated subset of checks, e.g. A5,coherence")
    p.add_argument("--expect", choices=("table1", "table2"), help="compare verdicts with the golden table column")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("table", help="reproduce a property table and compare it with golden data")
    p.add_argument("number", type=int, choices=(1, 2))
    _common(p)
    p.add_argument("--golden", help="alternative golden JSON file")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("counterexample", help="recompute a named exact counterexample")
    p.add_argument("name", help=", ".join(experiments.COUNTEREXAMPLES))
    _common(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("chsh", help="CHSH value of a rule on the singlet")
    _common(p, rule=True)
    p.set_defaults(func=cmd_chsh)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gur: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
