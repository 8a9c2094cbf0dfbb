#!/usr/bin/env python3
"""Run the bundled full-roster scenario in both modes and print a
side-by-side comparison: per-terminal watts, caps, and QoS outcomes.

Usage:
    python scripts/reproduce_comparison.py [scenario]

where ``scenario`` is a bundled scenario name or a TOML path
(default: table2).
"""

import sys

from powerbid import load_scenario, run_baseline, run_with_power_limits


def main() -> int:
    name = sys.argv[1] if len(sys.argv) > 1 else "table2"
    scenario = load_scenario(name)
    base = run_baseline(scenario)
    lim = run_with_power_limits(scenario)

    print(f"scenario: {name}   budget: {scenario.p_total_w} W")
    print(f"baseline:      {base.iterations:4d} rounds, converged={base.converged}")
    print(f"power-limited: {lim.iterations:4d} rounds, converged={lim.converged}, "
          f"infeasible={lim.infeasible}")
    print()

    header = (f"{'id':>3}  {'cqi':>3}  {'cap W':>8}  {'baseline W':>11}  "
              f"{'limited W':>10}  {'qos base':>8}  {'qos lim':>7}  {'exit@':>5}")
    print(header)
    print("-" * len(header))
    for bo, lo in zip(base.outcomes, lim.outcomes):
        cap = f"{lo.power_limit_w:.3f}" if lo.power_limit_w is not None else "-"
        exit_at = str(lo.exit_iteration) if lo.exited else "-"
        print(f"{lo.ue_id:>3}  {lo.cqi if lo.cqi is not None else '-':>3}  "
              f"{cap:>8}  {bo.allocated_w:>11.4f}  {lo.allocated_w:>10.4f}  "
              f"{str(bo.reached_qos).lower():>8}  {str(lo.reached_qos).lower():>7}  "
              f"{exit_at:>5}")
    print("-" * len(header))
    print(f"{'sum':>3}  {'':>3}  {'':>8}  {base.total_allocated_w:>11.4f}  "
          f"{lim.total_allocated_w:>10.4f}")
    n = len(lim.outcomes)
    print()
    print(f"QoS reached -- power-limited: {lim.qos_reached_count}/{n}, "
          f"baseline: {base.qos_reached_count}/{n}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
