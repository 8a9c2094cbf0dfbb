"""Utility-proportional-fair downlink power allocation via distributed bidding.

Public surface:

* :mod:`powerbid.sigmoid` -- normalized sigmoidal utility curves.
* :mod:`powerbid.cqi` -- the CQI catalog (modulation, rate, fitted shapes).
* :mod:`powerbid.channel` -- path loss and distance-to-CQI zone maps.
* :mod:`powerbid.fitting` -- least-squares recovery of utility parameters.
* :mod:`powerbid.bidding` -- the bidding allocator (baseline and
  power-limited variants).
* :mod:`powerbid.oracle` -- independent convex solvers used to verify the
  allocator.
* :mod:`powerbid.scenario` -- TOML scenario files.
* :mod:`powerbid.cli` -- the ``powerbid`` command.
"""

from .bidding import (
    AllocationResult,
    ConvergenceConfig,
    UeOutcome,
    UeSetup,
    allocate,
    run_baseline,
    run_with_power_limits,
)
from .cqi import ALL_CQIS, CqiClass, catalog_entry, qos_power_for_cqi, utility_for_cqi
from .fitting import FitConfig, FitResult, FitSample, fit_sigmoid
from .oracle import kkt_check, solve_grid_search, solve_projected_gradient
from .scenario import Scenario, ScenarioError, UeSpec, load_scenario
from .sigmoid import SigmoidUtility

__version__ = "0.1.0"

__all__ = [
    "ALL_CQIS",
    "AllocationResult",
    "ConvergenceConfig",
    "CqiClass",
    "FitConfig",
    "FitResult",
    "FitSample",
    "Scenario",
    "ScenarioError",
    "SigmoidUtility",
    "UeOutcome",
    "UeSetup",
    "UeSpec",
    "allocate",
    "catalog_entry",
    "fit_sigmoid",
    "kkt_check",
    "load_scenario",
    "qos_power_for_cqi",
    "run_baseline",
    "run_with_power_limits",
    "solve_grid_search",
    "solve_projected_gradient",
    "utility_for_cqi",
    "__version__",
]
