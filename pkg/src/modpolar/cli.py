"""Command line interface.

    python -m modpolar.cli check scenario.yaml
    python -m modpolar.cli polar scenario.yaml --format machine
    python -m modpolar.cli invariants scenario.yaml
    python -m modpolar.cli gallery
    python -m modpolar.cli fuzz --seed 7 --count 50 --algebra 2 --rank 3

The exit status is 0 when every check passes, 1 when a check fails and 2 for
unusable input.  ``MODPOLAR_TOL`` sets the default tolerance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .algebra import DEFAULT_TOL, parse_block_dims
from .function.analysis import GRID
from .runner import ScenarioError, fuzz, gallery, normalize, parse_ranks, restrict_requests, run
from .scenario import ParseError, load_scenario

ENV_TOL = "MODPOLAR_TOL"


def default_tol() -> float:
    raw = os.environ.get(ENV_TOL)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise SystemExit(f"error: {ENV_TOL}={raw!r} is not a number") from None
    if tol < 0:
        raise SystemExit(f"error: {ENV_TOL} must be non-negative")
    return tol


def dumps_machine(report: dict) -> str:
    """Canonical machine-readable form: sorted JSON with rounded floats."""
    return json.dumps(normalize(report), sort_keys=True, indent=2) + "\n"


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt_value(x)}" for k, x in sorted(v.items())) + "}"
    return str(v)


def format_report(report: dict) -> str:
    lines = [f"scenario {report['scenario']} ({report['backend']}, {report['algebra']}, tol={report['tol']:g})"]
    for r in report["results"]:
        lines.append(f"  [{r['status']}] {r['operator']} {r['analysis']}")
        for k in sorted(r["verdict"]):
            lines.append(f"      {k} = {_fmt_value(r['verdict'][k])}")
    for e in report["expectations"]:
        mark = "pass" if e["passed"] else "FAIL"
        lines.append(f"  expect {e['key']} = {_fmt_value(e['expected'])}: {mark} (got {_fmt_value(e['actual'])})")
    s = report["summary"]
    verdict = "PASS" if s["passed"] else "FAIL"
    lines.append(
        f"  {verdict}: {s['ok']} ok, {s['refused']} refused, {s['fail']} failed, "
        f"{s['expectations_failed']} expectation(s) unmet"
    )
    return "\n".join(lines) + "\n"


def format_gallery(report: dict) -> str:
    parts = [format_report(r) for r in report["reports"]]
    s = report["summary"]
    parts.append(f"gallery: {s['passed']}/{s['scenarios']} scenarios passed\n")
    return "".join(parts)


def format_fuzz(report: dict) -> str:
    lines = [f"fuzz seed={report['seed']} algebra={report['algebra']} ranks={report['ranks']} tol={report['tol']:g}"]
    for c in report["cases"]:
        if not c["passed"]:
            lines.append(f"  case {c['index']} (rank {c['rank']}) failed: {', '.join(c['failed'])}")
    s = report["summary"]
    lines.append(f"  {s['passed']}/{report['count']} invariant suites passed")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help=f"tolerance (default: ${ENV_TOL} or {DEFAULT_TOL:g})")
    common.add_argument("--grid", type=int, default=GRID, help="grid size for pointwise checks on C[0,1]")
    common.add_argument("--format", choices=("human", "machine"), default="human")
    common.add_argument("--seed", type=int, default=0, help="random seed (fuzz)")
    common.add_argument("--fail-fast", action="store_true", help="stop at the first failure")

    parser = argparse.ArgumentParser(prog="modpolar", description="Polar decomposition of modular operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "run every request in a scenario"),
        ("polar", "run only the polar requests of a scenario"),
        ("invariants", "run only the kernel-invariant requests of a scenario"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("file")
    sub.add_parser("gallery", parents=[common], help="run the built-in scenarios")
    p = sub.add_parser("fuzz", parents=[common], help="random operators checked against oracles")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--algebra", default="1", help="block sizes, e.g. '2' or '1,2' or 'C+M2'")
    p.add_argument("--rank", default="2", help="module rank(s): '3', '1-4' or '1,2'")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    tol = args.tol if args.tol is not None else default_tol()
    if tol < 0:
        print("error: --tol must be non-negative", file=sys.stderr)
        return 2
    machine = args.format == "machine"
    try:
        if args.command in ("check", "polar", "invariants"):
            scenario = load_scenario(args.file)
            if args.command != "check":
                scenario = restrict_requests(scenario, [args.command])
            report = run(scenario, tol=tol, grid=args.grid, fail_fast=args.fail_fast)
            text = dumps_machine(report) if machine else format_report(report)
            ok = report["summary"]["passed"]
        elif args.command == "gallery":
            report = gallery(tol=tol, grid=args.grid, fail_fast=args.fail_fast)
            text = dumps_machine(report) if machine else format_gallery(report)
            ok = report["summary"]["all_passed"]
        else:
            algebra = parse_block_dims(args.algebra)
            if args.count < 0:
                raise ValueError("--count must be non-negative")
            report = fuzz(args.seed, args.count, algebra, parse_ranks(args.rank), tol, args.fail_fast)
            text = dumps_machine(report) if machine else format_fuzz(report)
            ok = report["summary"]["all_passed"]
    except (ParseError, ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
