"""Command-line entry point.

Subcommands: ``plan`` (solve a scenario and write artifacts),
``fit-cic`` (fit rate quadratics from a sample CSV), ``oracle clpu`` /
``oracle cic`` (closed-form oracle queries), ``verify`` (referee a plan
JSON) and ``report`` (regenerate CSVs from a plan JSON).

Exit codes: 0 success, 1 failed checks or infeasible model, 2 bad
usage/input, 3 backend unavailable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .backends import BackendConfig, BackendUnavailable, available_backends
from .cic import CicProfile, fit_quadratic_rate, rate_oracle
from .clpu import curve_oracle
from .netdata import ScenarioError, load_scenario
from .planner import ABLATIONS, solve_restoration
from .report import dynamic_rating_spans, load_plan, write_artifacts
from .verify import check_solution


def _backend_config(args) -> BackendConfig:
    return BackendConfig(
        backend=args.backend,
        gap=args.gap,
        time_limit=args.time_limit,
        solver_exe=args.solver_exe,
    )


def cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _backend_config(args)
    print(
        f"solving {scenario.name} (ablation={args.ablation}, backend={cfg.backend}, "
        f"gap={cfg.gap}, limit={cfg.time_limit}s)"
    )
    try:
        solution, plan, build = solve_restoration(
            scenario,
            cfg,
            segments=args.segments,
            cuts=not args.no_cuts,
            ablation=args.ablation,
        )
    except BackendUnavailable as exc:
        print(str(exc), file=sys.stderr)
        return 3
    print(f"status: {solution.status}  detail: {solution.detail}")
    if plan is None:
        print("no incumbent solution; nothing to write", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "solver.log"), "w") as fh:
        fh.write(
            f"scenario: {scenario.name}\nablation: {args.ablation}\n"
            f"backend: {cfg.backend}\nstatus: {solution.status}\n"
            f"objective: {solution.objective}\ngap: {solution.gap}\n"
            f"max residual: {solution.max_residual:.3e}\n"
            f"variables: {build.model.num_variables}\n"
            f"constraints: {len(build.model.constraints)}\ndetail: {solution.detail}\n"
        )
    paths = write_artifacts(build.scenario, plan, args.out)
    report = check_solution(build.scenario, plan, solution, segments=args.segments)
    with open(os.path.join(args.out, "validation.json"), "w") as fh:
        json.dump(report.to_json(), fh, indent=1)
        fh.write("\n")
    breakdown = plan.objective_breakdown
    print(f"objective: {plan.objective_total:.2f} (gap {plan.gap})")
    print(f"total CIC: {breakdown['cic']:.2f}")
    rating = dynamic_rating_spans(build.scenario, plan)
    if rating:
        print(f"dynamic-rating spans (island, span): {rating}")
    print(f"validation: {'PASS' if report.overall else 'FAIL'}")
    for name in sorted(paths):
        print(f"  {name}: {paths[name]}")
    return 0 if report.overall else 1


def cmd_fit_cic(args) -> int:
    by_class: dict[str, list] = {}
    with open(args.samples, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"class", "cid_hours", "rate_usd_per_kwh"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            print(
                f"samples CSV must carry columns {sorted(required)}", file=sys.stderr
            )
            return 2
        for row in reader:
            by_class.setdefault(row["class"], []).append(
                (float(row["cid_hours"]), float(row["rate_usd_per_kwh"]))
            )
    if not by_class:
        print("no sample rows found", file=sys.stderr)
        return 2
    profiles = {}
    for key in sorted(by_class):
        try:
            p = fit_quadratic_rate(by_class[key], key)
        except ValueError as exc:
            print(f"class {key}: {exc}", file=sys.stderr)
            return 2
        profiles[key] = {"a": p.a, "b": p.b, "c": p.c, "fit_r2": p.fit_r2}
        print(
            f"{key}: a={p.a:.6g} b={p.b:.6g} c={p.c:.6g} r2={p.fit_r2:.6f}"
        )
    with open(args.out, "w") as fh:
        json.dump(profiles, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out}")
    return 0


def cmd_oracle(args) -> int:
    if args.kind == "clpu":
        scenario = load_scenario(args.scenario)
        profile = scenario.clpu_profiles.get(args.customer_class)
        if profile is None:
            print(f"no CLPU profile {args.customer_class!r}", file=sys.stderr)
            return 2
        curve = curve_oracle(profile, args.d, args.t1, scenario.horizon_spans)
        print("span,multiplier")
        for t in range(1, scenario.horizon_spans + 1):
            print(f"{t},{curve.multiplier(t):.9g}")
        return 0
    if args.abc:
        a, b, c = (float(x) for x in args.abc.split(","))
        profile = CicProfile("cli", a, b, c)
        eps = args.eps
        dt = args.dt
    else:
        scenario = load_scenario(args.scenario)
        profile = scenario.cic_profiles.get(args.customer_class)
        if profile is None:
            print(f"no CIC profile {args.customer_class!r}", file=sys.stderr)
            return 2
        eps = scenario.epsilon_rate
        dt = scenario.span_hours
    rate = rate_oracle(profile, args.alpha, dt, eps)
    print(f"{rate:.9g}")
    return 0


def cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    plan = load_plan(args.plan)
    report = check_solution(scenario, plan, segments=args.segments)
    print(report.to_text())
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report.to_json(), fh, indent=1)
            fh.write("\n")
    return 0 if report.overall else 1


def cmd_report(args) -> int:
    scenario = load_scenario(args.scenario)
    plan = load_plan(args.plan)
    paths = write_artifacts(scenario, plan, args.out)
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="restoplan",
        description="Distribution-system restoration planning with "
        "decision-dependent interruption cost and cold load pickup.",
    )
    ap.add_argument("--version", action="version", version=f"restoplan {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_backend_args(p):
        p.add_argument(
            "--backend",
            default="scipy",
            choices=["scipy", "glpk", "process"],
            help=f"solver backend (available here: {', '.join(available_backends())})",
        )
        p.add_argument("--gap", type=float, default=0.01, help="relative MIP gap")
        p.add_argument("--time-limit", type=float, default=1800.0, help="seconds")
        p.add_argument(
            "--solver-exe",
            default=None,
            help="executable for the process backend (default: $RESTOPLAN_SOLVER "
            "or the bundled restoplan-solve)",
        )

    p = sub.add_parser("plan", help="solve a restoration scenario")
    p.add_argument("--scenario", default="case33", help="path or 'case33'")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--ablation", default="none", choices=ABLATIONS)
    p.add_argument("--segments", type=int, default=12, help="cone polygon segments")
    p.add_argument("--no-cuts", action="store_true", help="drop the McCormick cuts")
    add_backend_args(p)
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("fit-cic", help="fit rate quadratics from samples")
    p.add_argument("--samples", required=True, help="CSV: class,cid_hours,rate_usd_per_kwh")
    p.add_argument("--out", required=True, help="profile JSON path")
    p.set_defaults(fn=cmd_fit_cic)

    p = sub.add_parser("oracle", help="closed-form oracle queries")
    osub = p.add_subparsers(dest="kind", required=True)
    oc = osub.add_parser("clpu", help="restored-load multiplier curve")
    oc.add_argument("--scenario", default="case33")
    oc.add_argument("--class", dest="customer_class", default="residential")
    oc.add_argument("--d", type=int, required=True, help="final CID in spans")
    oc.add_argument("--t1", type=int, required=True, help="restoration offset in spans")
    oc.set_defaults(fn=cmd_oracle)
    oi = osub.add_parser("cic", help="clamped interruption-cost rate")
    oi.add_argument("--scenario", default="case33")
    oi.add_argument("--class", dest="customer_class", default="residential")
    oi.add_argument("--alpha", type=int, required=True, help="CID in spans")
    oi.add_argument("--abc", default=None, help="override profile as 'a,b,c'")
    oi.add_argument("--dt", type=float, default=0.5, help="span hours (with --abc)")
    oi.add_argument("--eps", type=float, default=1e-3, help="rate floor (with --abc)")
    oi.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("verify", help="referee a plan JSON against a scenario")
    p.add_argument("--scenario", default="case33")
    p.add_argument("--plan", required=True)
    p.add_argument("--segments", type=int, default=12)
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("report", help="regenerate artifacts from a plan JSON")
    p.add_argument("--scenario", default="case33")
    p.add_argument("--plan", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except BackendUnavailable as exc:
        print(str(exc), file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
