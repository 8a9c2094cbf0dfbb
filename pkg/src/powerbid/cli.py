"""Command-line front end.

Two subcommands:

* ``powerbid run SCENARIO [--mode baseline|power-limit|both] [--out DIR]``
  runs the allocation and writes, per mode, three artifacts into the output
  directory: ``allocations.csv`` (final per-terminal powers and flags),
  ``trajectory.csv`` (every bid and shadow price by round), and
  ``report.json`` (machine-readable summary).  Mode ``both`` nests the two
  runs under ``baseline/`` and ``power-limit/`` subdirectories and writes a
  top-level comparison ``report.json``.
* ``powerbid validate SCENARIO`` checks the file and prints every problem.

``SCENARIO`` is a TOML file path, or the name of a bundled scenario
(``powerbid run table2`` works from anywhere).

Exit codes: 0 success; 1 the run completed but did not converge (or was
infeasible) -- outputs are still written, flagged accordingly; 2 invalid
input.  Outputs contain nothing nondeterministic (no timestamps, no absolute
paths), so reruns of the same scenario are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bidding import AllocationResult, run_baseline, run_with_power_limits
from .scenario import (
    MODES,
    Scenario,
    ScenarioError,
    load_scenario,
    validate_for_mode,
    with_overrides,
)

__all__ = ["main"]


def _fmt(value) -> str:
    """Deterministic cell formatting: floats via repr, None empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_allocations_csv(path: Path, result: AllocationResult) -> None:
    lines = ["ue_id,cqi,power_limit_w,allocated_w,reached_qos"]
    for o in result.outcomes:
        lines.append(
            ",".join(
                [_fmt(o.ue_id), _fmt(o.cqi), _fmt(o.power_limit_w),
                 _fmt(o.allocated_w), _fmt(o.reached_qos)]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _write_trajectory_csv(path: Path, result: AllocationResult) -> None:
    lines = ["iteration,ue_id,bid,shadow_price"]
    for pt in result.trajectory:
        lines.append(
            ",".join([_fmt(pt.iteration), _fmt(pt.ue_id), _fmt(pt.bid), _fmt(pt.shadow_price)])
        )
    path.write_text("\n".join(lines) + "\n")


def _report_dict(mode: str, scenario: Scenario, result: AllocationResult) -> dict:
    return {
        "mode": mode,
        "p_total_w": scenario.p_total_w,
        "iterations": result.iterations,
        "converged": result.converged,
        "infeasible": result.infeasible,
        "qos_reached_count": result.qos_reached_count,
        "total_allocated_w": result.total_allocated_w,
        "shadow_price": result.shadow_price,
        "config": {
            **dataclasses.asdict(scenario.convergence),
            "qos_target": scenario.qos_target,
        },
        "per_ue": [
            {
                "ue_id": o.ue_id,
                "cqi": o.cqi,
                "power_limit_w": o.power_limit_w,
                "qos_power_w": o.qos_power_w,
                "allocated_w": o.allocated_w,
                "reached_qos": o.reached_qos,
                "exited": o.exited,
                "exit_iteration": o.exit_iteration,
            }
            for o in result.outcomes
        ],
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_single(out_dir: Path, mode: str, scenario: Scenario, result: AllocationResult) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_allocations_csv(out_dir / "allocations.csv", result)
    _write_trajectory_csv(out_dir / "trajectory.csv", result)
    _write_json(out_dir / "report.json", _report_dict(mode, scenario, result))


def _run_status(result: AllocationResult) -> str:
    bits = ["converged" if result.converged else "did NOT converge"]
    if result.infeasible:
        bits.append("INFEASIBLE")
    return ", ".join(bits)


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        for e in exc.errors:
            print(e, file=sys.stderr)
        return 2
    scenario = with_overrides(
        scenario, delta=args.delta, l1=args.l1, l2=args.l2, max_iterations=args.max_iter
    )
    mode_errors = validate_for_mode(scenario, args.mode)
    if mode_errors:
        for e in mode_errors:
            print(e, file=sys.stderr)
        return 2

    out_dir = Path(args.out if args.out is not None else (scenario.output_dir or "out"))
    results: dict[str, AllocationResult] = {}
    if args.mode in ("baseline", "both"):
        results["baseline"] = run_baseline(scenario)
    if args.mode in ("power-limit", "both"):
        results["power-limit"] = run_with_power_limits(scenario)

    if args.mode == "both":
        for mode, result in results.items():
            _write_single(out_dir / mode, mode, scenario, result)
        base, lim = results["baseline"], results["power-limit"]
        n = len(base.outcomes)
        summary = (
            f"PL: {lim.qos_reached_count}/{n} reach QoS; "
            f"baseline: {base.qos_reached_count}/{n}"
        )
        comparison = {
            "mode": "both",
            "p_total_w": scenario.p_total_w,
            "summary": summary,
            "baseline": {
                "iterations": base.iterations,
                "converged": base.converged,
                "infeasible": base.infeasible,
                "qos_reached_count": base.qos_reached_count,
                "total_allocated_w": base.total_allocated_w,
            },
            "power_limit": {
                "iterations": lim.iterations,
                "converged": lim.converged,
                "infeasible": lim.infeasible,
                "qos_reached_count": lim.qos_reached_count,
                "total_allocated_w": lim.total_allocated_w,
            },
            "per_ue": [
                {
                    "ue_id": bo.ue_id,
                    "cqi": bo.cqi,
                    "baseline_w": bo.allocated_w,
                    "power_limited_w": lo.allocated_w,
                    "baseline_reached_qos": bo.reached_qos,
                    "power_limited_reached_qos": lo.reached_qos,
                    "exited": lo.exited,
                }
                for bo, lo in zip(base.outcomes, lim.outcomes)
            ],
        }
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "report.json", comparison)
        print(summary)
    else:
        mode, result = next(iter(results.items()))
        _write_single(out_dir, mode, scenario, result)

    status = 0
    for mode, result in results.items():
        print(f"{mode}: {_run_status(result)} after {result.iterations} iterations; "
              f"{result.qos_reached_count}/{len(result.outcomes)} reach QoS")
        if not result.converged or result.infeasible:
            status = 1
    print(f"wrote {out_dir}")
    return status


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        for e in exc.errors:
            print(e, file=sys.stderr)
        return 2
    mode_errors = validate_for_mode(scenario, args.mode)
    if mode_errors:
        for e in mode_errors:
            print(e, file=sys.stderr)
        return 2
    print(f"{args.scenario}: ok ({len(scenario.ues)} terminals, "
          f"{scenario.p_total_w} W budget, mode {args.mode})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerbid",
        description="Utility-proportional-fair downlink power allocation via distributed bidding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write allocation artifacts")
    run.add_argument("scenario", help="scenario TOML path, or a bundled scenario name")
    run.add_argument("--mode", choices=MODES, default="both",
                     help="which auction(s) to run (default: both)")
    run.add_argument("--out", default=None, help="output directory (default: scenario's, else ./out)")
    run.add_argument("--max-iter", type=int, default=None, help="override convergence.max_iterations")
    run.add_argument("--delta", type=float, default=None, help="override convergence.delta")
    run.add_argument("--l1", type=float, default=None, help="override convergence.l1")
    run.add_argument("--l2", type=float, default=None, help="override convergence.l2")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a scenario file and report every problem")
    val.add_argument("scenario", help="scenario TOML path, or a bundled scenario name")
    val.add_argument("--mode", choices=MODES, default="both",
                     help="mode to validate against (default: both, the strictest)")
    val.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
