"""Command-line entry point.

Exit codes: 0 success, 1 reproduction or property failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checks, config as cfgio
from .protocol import SETTING_INDICES, InequalityReport, evaluate, normalize_kind
from .reproduce import case_names, run_battery
from .search import (
    DEFAULT_BUDGET,
    DEFAULT_RESTARTS,
    FREE_ANGLES,
    PAPER_ANGLES,
    SearchSpec,
    optimize,
    rng_stream,
    sweep,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

CORR_COLUMNS = [f"C{i}{j}{l}" for i, j, l in SETTING_INDICES]
REPORT_COLUMNS = ["scenario_id", "m", "lambda_m", "M_m", "S_m"] + CORR_COLUMNS


class UsageError(Exception):
    pass


def _write(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def _csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def report_rows(sid: str, report: InequalityReport) -> list[list]:
    return [[sid, r.m, r.lam, r.mermin, r.svetlichny] + r.table.as_list() for r in report.rows]


def report_dict(sid: str, report: InequalityReport) -> dict:
    return {
        "scenario_id": sid,
        "state": report.scenario.state.kind,
        "lambdas": list(report.scenario.lambdas),
        "charlies": [
            {
                "m": r.m,
                "lambda": r.lam,
                "M": r.mermin,
                "S": r.svetlichny,
                "correlations": dict(zip(CORR_COLUMNS, r.table.as_list())),
            }
            for r in report.rows
        ],
    }


def _summary(report: InequalityReport) -> None:
    for r in report.rows:
        print(f"m={r.m}, lambda={r.lam:.4f}, M={r.mermin:.4f}, S={r.svetlichny:.4f}", file=sys.stderr)


def _load(args):
    if not args.config:
        raise UsageError("--config PATH is required")
    return cfgio.load(args.config, require_sharp_final=not args.allow_unsharp_final)


def cmd_evaluate(args) -> int:
    sid, config = _load(args)
    report = evaluate(config)
    _summary(report)
    if args.format == "csv":
        _write(args, _csv(report_rows(sid, report), REPORT_COLUMNS))
    else:
        _write(args, _json(report_dict(sid, report)))
    return EXIT_OK


def cmd_optimize(args) -> int:
    n = args.charlies
    if args.thresholds:
        thresholds = [float(t) for t in args.thresholds.split(",")]
    else:
        thresholds = []
    if len(thresholds) == 1 and n > 2:
        thresholds = thresholds * (n - 1)
    spec = SearchSpec(
        kind=args.kind,
        state=args.state,
        n=n,
        thresholds=thresholds,
        angle_mode=PAPER_ANGLES if args.fix_paper_angles else FREE_ANGLES,
        budget=args.budget,
        restarts=args.restarts,
        seed=args.seed,
    )
    res = optimize(spec)
    sid = f"optimize-{spec.kind}-{args.state}-n{n}"
    report = evaluate(res.best_config)
    _summary(report)
    print(f"best={res.best_value:.6f} feasible={res.feasible} evaluations={res.evaluations_used}", file=sys.stderr)
    if args.format == "csv":
        _write(args, _csv(report_rows(sid, report), REPORT_COLUMNS))
    else:
        out = report_dict(sid, report)
        out["search"] = {
            "kind": spec.kind,
            "thresholds": list(spec.thresholds),
            "angle_mode": spec.angle_mode,
            "best_value": res.best_value,
            "feasible": res.feasible,
            "thresholds_met": res.thresholds_met,
            "evaluations_used": res.evaluations_used,
            "seed": spec.seed,
        }
        out["scenario"] = cfgio.scenario_to_dict(res.best_config, sid)
        _write(args, _json(out))
    return EXIT_OK


def _parse_grid(text: str, n: int) -> tuple[int, list[float]]:
    try:
        idx, rest = text.split("=", 1)
        m = int(idx)
        if ":" in rest:
            a, b, k = rest.split(":")
            values = [float(v) for v in np.linspace(float(a), float(b), int(k))]
        else:
            values = [float(v) for v in rest.split(",")]
    except ValueError:
        raise UsageError(f"--grid {text!r}: expected M=start:stop:num or M=v1,v2,...") from None
    if not 1 <= m <= n:
        raise UsageError(f"--grid {text!r}: Charlie index must be in 1..{n}")
    for v in values:
        if not 0 < v <= 1:
            raise UsageError(f"--grid {text!r}: sharpness {v} outside (0, 1]")
    return m, values


def cmd_sweep(args) -> int:
    sid, template = _load(args)
    grids = [[lam] for lam in template.lambdas]
    for g in args.grid or []:
        m, values = _parse_grid(g, template.n)
        grids[m - 1] = values
    try:
        rows = sweep(template, grids, budget=args.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n = template.n
    header = ["scenario_id", "row"] + [f"lambda_{m}" for m in range(1, n + 1)]
    header += [f"M_{m}" for m in range(1, n + 1)] + [f"S_{m}" for m in range(1, n + 1)]
    table = [[sid, r.index, *r.lambdas, *r.mermin, *r.svetlichny] for r in rows]
    if args.format == "csv":
        _write(args, _csv(table, header))
    else:
        _write(args, _json({"scenario_id": sid, "rows": [dict(zip(header[1:], row[1:])) for row in table]}))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    only = args.only or None
    if only:
        unknown = [o for o in only if o not in case_names()]
        if unknown:
            raise UsageError(f"--only: unknown item group(s) {unknown}; choose from {case_names()}")

    def progress(item):
        flag = "PASS" if item.passed else "FAIL"
        print(
            f"[{flag}] {item.name}: expected {item.expected}, computed {_fmt(item.computed)}, "
            f"deviation {item.deviation:.3g} (tol {item.tolerance:g}) {item.note}".rstrip(),
            file=sys.stderr,
        )

    items = run_battery(
        seed=args.seed,
        budget=args.budget,
        restarts=args.restarts,
        observer_budget=args.observer_budget,
        skip_slow=args.skip_slow,
        only=only,
        progress=progress,
    )
    if args.format == "csv":
        rows = [[i.name, i.expected, i.computed, i.deviation, i.tolerance, i.passed, i.note] for i in items]
        _write(args, _csv(rows, ["item", "expected", "computed", "deviation", "tolerance", "passed", "note"]))
    else:
        payload = [i.as_dict() for i in items]
        for p in payload:
            p.pop("seconds")
        _write(args, _json({"seed": args.seed, "items": payload, "all_passed": all(i.passed for i in items)}))
    return EXIT_OK if all(i.passed for i in items) else EXIT_FAIL


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def cmd_oracle_check(args) -> int:
    eq = checks.oracle_equivalence(rng_stream(args.seed, "oracle-check.equivalence"), draws=args.draws)
    ns = checks.no_signalling(rng_stream(args.seed, "oracle-check.no-signalling"), draws=args.draws)
    witness = checks.temporal_signalling_witness(1.0)
    results = [
        {"check": eq.name, "max_deviation": eq.max_deviation, "tolerance": eq.tolerance, "passed": eq.passed, "offenders": eq.offenders},
        {"check": ns.name, "max_deviation": ns.max_deviation, "tolerance": ns.tolerance, "passed": ns.passed, "offenders": ns.offenders},
        {"check": "temporal_signalling_witness", "max_deviation": witness, "tolerance": 0.01, "passed": witness > 0.01, "offenders": []},
    ]
    for r in results:
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['check']}: max deviation {r['max_deviation']:.3e}", file=sys.stderr)
        for off in r["offenders"]:
            print(f"    offending draw {off}", file=sys.stderr)
    if args.format == "csv":
        _write(args, _csv([[r["check"], r["max_deviation"], r["tolerance"], r["passed"]] for r in results], ["check", "max_deviation", "tolerance", "passed"]))
    else:
        _write(args, _json({"seed": args.seed, "draws": args.draws, "checks": results}))
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario file (TOML)")
    common.add_argument("--out", metavar="PATH", default="-", help="results file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="objective evaluations per search")
    common.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    common.add_argument("--fix-paper-angles", action="store_true", help="search only sharpness values at the GHZ-optimal settings")
    common.add_argument("--allow-unsharp-final", action="store_true", help="do not require the last Charlie to be sharp")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="seqnonlocal", description="Sequential sharing of tripartite nonlocality.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("evaluate", parents=[common], help="per-Charlie Mermin/Svetlichny values of a scenario file")

    po = sub.add_parser("optimize", parents=[common], help="maximise the last Charlie's value under thresholds")
    po.add_argument("--kind", default="mermin", type=normalize_kind)
    po.add_argument("--state", default="GHZ", choices=("GHZ", "W"))
    po.add_argument("--charlies", type=int, default=2)
    po.add_argument("--thresholds", default="", help="comma-separated minimum values for Charlies 1..n-1")

    ps = sub.add_parser("sweep", parents=[common], help="grid over sharpness values")
    ps.add_argument("--grid", action="append", metavar="M=start:stop:num", help="grid for Charlie M (repeatable)")

    pr = sub.add_parser("reproduce", parents=[common], help="run the pinned battery of published values")
    pr.add_argument("--skip-slow", action="store_true", help="skip the max-observer searches")
    pr.add_argument("--only", action="append", metavar="GROUP", help=f"run only these groups: {', '.join(case_names())}")
    pr.add_argument("--observer-budget", type=int, default=100_000, help="evaluations per n in max-observer searches")

    pc = sub.add_parser("oracle-check", parents=[common], help="oracle equivalence and no-signalling properties")
    pc.add_argument("--draws", type=int, default=50)
    return p


COMMANDS = {
    "evaluate": cmd_evaluate,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (cfgio.ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        # SearchSpec and scenario validation
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
