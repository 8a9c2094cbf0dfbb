"""Distributed bidding allocator for utility-proportional-fair power.

The base station and the user terminals run a price/bid fixed-point
iteration that solves

    maximize   sum_i  ln U_i(P_i)
    subject to sum_i  P_i <= P_T,   P_i >= 0

without the base station ever seeing the utility curves.  Each round n:

1. The base station announces a shadow price  p(n) = sum_i w_i(n) / P_T
   from the current bids (``bs_step``).
2. Each terminal solves its own one-dimensional problem -- find the power
   where its log-utility slope equals the price (``solve_ue_subproblem``;
   strict monotonicity of the slope makes the answer unique) -- and sends
   back the bid  w_i(n+1) = p(n) * P_i(n), rate-limited so the step from
   w_i(n) is at most ``fluctuation_cap(n)``.  The cap decays geometrically
   with the round number, which damps the oscillation the raw iteration
   exhibits when users' utilities are steep.
3. When every active bid moves less than ``delta``, the base station settles:
   it recomputes the price from the final bids and splits the budget
   proportionally, P_i = w_i / p.  The split exhausts the budget exactly.

Power-limited variant
---------------------
``run_with_power_limits`` runs the same loop, but a terminal whose solved
demand exceeds its own power cap *exits*: it is granted that demand
outright, the budget available to everyone else shrinks accordingly, and it
stops bidding.  Exits are processed in ascending terminal id within a round;
all remaining terminals see the reduced budget from the next round on.  The
final outcome is path-dependent by design -- it depends on the bid starting
point and the price trajectory, not only on the optimization problem -- so
runs are deterministic but config-sensitive.  Two consequences worth
knowing:

* If simultaneous exits over-commit the budget (or leave active terminals
  with nothing), the run is flagged ``infeasible`` rather than raising;
  remaining terminals are settled at zero.
* A terminal that never exits can settle marginally above its cap: exit
  tests the *solved demand* each round, while the final allocation is the
  proportional settlement, and the two differ by up to the convergence
  tolerance.

With every cap infinite the variant reduces, round for round, to the
baseline -- covered by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .sigmoid import SigmoidUtility

__all__ = [
    "ConvergenceConfig",
    "UeSetup",
    "UeAgent",
    "UeState",
    "TrajectoryPoint",
    "UeOutcome",
    "AllocationResult",
    "fluctuation_cap",
    "bs_step",
    "solve_ue_subproblem",
    "allocate",
    "run_baseline",
    "run_with_power_limits",
]


@dataclass(frozen=True)
class ConvergenceConfig:
    """Knobs of the bidding iteration.

    ``delta`` is the bid-stability threshold; ``l1``/``l2`` shape the
    fluctuation cap l1 * exp(-n / l2); ``w_init`` seeds every bid;
    ``root_tolerance`` is the absolute power tolerance of the per-terminal
    subproblem bisection.
    """

    delta: float = 1e-3
    l1: float = 10.0
    l2: float = 20.0
    w_init: float = 1.0
    max_iterations: int = 10_000
    root_tolerance: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("delta", "l1", "l2", "w_init", "root_tolerance"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not (isinstance(self.max_iterations, int) and self.max_iterations >= 1):
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")


@dataclass(frozen=True)
class UeSetup:
    """Resolved per-terminal inputs the allocator consumes.

    ``power_limit_w = None`` means uncapped (allowed in baseline mode only);
    ``qos_power_w`` is the threshold the reached-QoS flag compares against.
    ``cqi`` is carried for reporting and may be None for terminals specified
    directly by utility parameters.
    """

    id: int
    utility: SigmoidUtility
    qos_power_w: float
    power_limit_w: Optional[float] = None
    cqi: Optional[int] = None

    def __post_init__(self) -> None:
        if not (isinstance(self.qos_power_w, (int, float)) and self.qos_power_w > 0.0):
            raise ValueError(f"ue {self.id}: qos_power_w must be > 0, got {self.qos_power_w!r}")
        if self.power_limit_w is not None and not self.power_limit_w > 0.0:
            raise ValueError(f"ue {self.id}: power_limit_w must be > 0, got {self.power_limit_w!r}")


class UeState(Enum):
    BIDDING = "bidding"
    EXITED = "exited"      # took its capped demand and left the auction
    SETTLED = "settled"    # allocated at settlement (convergence or abort)


class UeAgent:
    """Bid state machine for one terminal.

    Terminal states are immutable: once EXITED or SETTLED, any further
    bid update or transition raises RuntimeError.
    """

    def __init__(self, setup: UeSetup, w_init: float):
        self.setup = setup
        self.state = UeState.BIDDING
        self.bid = w_init
        self.prev_bid: Optional[float] = None
        self.power_w: Optional[float] = None
        self.exit_iteration: Optional[int] = None

    def _require_bidding(self) -> None:
        if self.state is not UeState.BIDDING:
            raise RuntimeError(
                f"ue {self.setup.id} is terminal ({self.state.value}); no further updates allowed"
            )

    def bid_is_stable(self, delta: float) -> bool:
        self._require_bidding()
        return self.prev_bid is not None and abs(self.bid - self.prev_bid) < delta

    def update_bid(self, raw_bid: float, iteration: int, config: ConvergenceConfig) -> None:
        """Move toward ``raw_bid``, rate-limited by the decaying cap."""
        self._require_bidding()
        cap = fluctuation_cap(iteration, config.l1, config.l2)
        step = raw_bid - self.bid
        if step > cap:
            step = cap
        elif step < -cap:
            step = -cap
        self.prev_bid = self.bid
        self.bid = self.bid + step

    def mark_exited(self, power_w: float, iteration: int) -> None:
        self._require_bidding()
        self.state = UeState.EXITED
        self.power_w = power_w
        self.exit_iteration = iteration

    def settle(self, power_w: float) -> None:
        self._require_bidding()
        self.state = UeState.SETTLED
        self.power_w = power_w


@dataclass(frozen=True)
class TrajectoryPoint:
    iteration: int
    ue_id: int
    bid: float
    shadow_price: float


@dataclass(frozen=True)
class UeOutcome:
    ue_id: int
    cqi: Optional[int]
    allocated_w: float
    reached_qos: bool
    exited: bool
    exit_iteration: Optional[int]
    power_limit_w: Optional[float]
    qos_power_w: float


@dataclass(frozen=True)
class AllocationResult:
    p_total_w: float
    outcomes: tuple[UeOutcome, ...]
    iterations: int
    converged: bool
    infeasible: bool
    shadow_price: Optional[float]
    trajectory: tuple[TrajectoryPoint, ...] = field(repr=False)

    @property
    def allocations(self) -> dict[int, float]:
        return {o.ue_id: o.allocated_w for o in self.outcomes}

    @property
    def qos_reached_count(self) -> int:
        return sum(1 for o in self.outcomes if o.reached_qos)

    @property
    def total_allocated_w(self) -> float:
        return sum(o.allocated_w for o in self.outcomes)


def fluctuation_cap(iteration: int, l1: float, l2: float) -> float:
    """Largest bid movement allowed at round ``iteration`` (1-based).

    Decays as l1 * exp(-iteration / l2): generous early so bids can travel,
    tightening over rounds to choke residual oscillation.
    """
    if iteration < 1:
        raise ValueError(f"iteration is 1-based, got {iteration!r}")
    return l1 * math.exp(-iteration / l2)


def bs_step(bids: Sequence[float], p_total_w: float) -> float:
    """Base-station price update: shadow price = sum of bids / budget.

    A non-positive budget with outstanding bids yields ``inf`` -- the
    engine treats a non-finite price as the infeasibility signal rather
    than raising, so partial results can still be reported.
    """
    total = math.fsum(bids)
    if p_total_w <= 0.0:
        return math.inf if bids else 0.0
    return total / p_total_w


def solve_ue_subproblem(
    utility: SigmoidUtility,
    price: float,
    p_max: float,
    tolerance: float = 1e-8,
) -> float:
    """Terminal's best response: power where the log-utility slope equals
    ``price``, capped at ``p_max``.

    The slope is strictly decreasing from +inf (at 0+) to 0, so the
    uncapped response is the unique root of slope(p) = price; when even
    ``p_max`` has slope above the price the cap binds and ``p_max`` is
    returned.  Bisection to absolute power tolerance ``tolerance``.
    """
    if not (math.isfinite(price) and price > 0.0):
        raise ValueError(f"price must be positive and finite, got {price!r}")
    if not (math.isfinite(p_max) and p_max > 0.0):
        raise ValueError(f"p_max must be positive and finite, got {p_max!r}")
    if utility.slope(p_max) >= price:
        return p_max
    lo = 1e-15
    if lo >= p_max or utility.slope(lo) <= price:
        # Price so extreme the demand is indistinguishable from zero power.
        return lo
    hi = p_max
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if utility.slope(mid) > price:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def allocate(
    setups: Sequence[UeSetup],
    p_total_w: float,
    config: ConvergenceConfig = ConvergenceConfig(),
    enforce_limits: bool = False,
) -> AllocationResult:
    """Run the bidding loop over resolved terminals.

    ``enforce_limits=False`` is the baseline auction (caps ignored even if
    present); ``enforce_limits=True`` is the power-limited variant and
    requires every terminal to carry a cap.  Terminals are processed in
    ascending id order throughout, which fixes the exit order within a
    round; the whole run is deterministic.
    """
    if not setups:
        raise ValueError("need at least one terminal")
    if not (math.isfinite(p_total_w) and p_total_w > 0.0):
        raise ValueError(f"p_total_w must be positive and finite, got {p_total_w!r}")
    ordered = sorted(setups, key=lambda s: s.id)
    ids = [s.id for s in ordered]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate terminal ids: {ids}")
    if enforce_limits:
        for s in ordered:
            if s.power_limit_w is None:
                raise ValueError(f"ue {s.id}: power limit required in power-limited mode")

    agents = [UeAgent(s, config.w_init) for s in ordered]
    budget = p_total_w
    trajectory: list[TrajectoryPoint] = []
    rounds = 0
    converged = False
    infeasible = False
    last_price: Optional[float] = None

    while True:
        active = [ag for ag in agents if ag.state is UeState.BIDDING]
        if not active:
            converged = True
            break
        if rounds >= 1 and all(ag.bid_is_stable(config.delta) for ag in active):
            converged = True
            break
        if rounds >= config.max_iterations:
            break
        if budget <= 0.0:
            infeasible = True
            break

        rounds += 1
        price = bs_step([ag.bid for ag in active], budget)
        if not (math.isfinite(price) and price > 0.0):
            infeasible = True
            break
        last_price = price
        for ag in active:
            trajectory.append(TrajectoryPoint(rounds, ag.setup.id, ag.bid, price))

        demands = [
            solve_ue_subproblem(ag.setup.utility, price, p_max=budget, tolerance=config.root_tolerance)
            for ag in active
        ]

        if enforce_limits:
            for ag, demand in zip(active, demands):
                if demand > ag.setup.power_limit_w:
                    ag.mark_exited(demand, rounds)
                    budget -= demand
            survivors = [ag for ag in active if ag.state is UeState.BIDDING]
            if budget < 0.0 or (budget <= 0.0 and survivors):
                infeasible = True
                break

        for ag, demand in zip(active, demands):
            if ag.state is UeState.BIDDING:
                ag.update_bid(price * demand, rounds, config)

    # Settlement: split what's left of the budget proportionally to the
    # final bids.  On an infeasible abort the still-active terminals get
    # nothing -- there is nothing left to split.
    active = [ag for ag in agents if ag.state is UeState.BIDDING]
    if active:
        if infeasible or budget <= 0.0:
            for ag in active:
                ag.settle(0.0)
        else:
            price = bs_step([ag.bid for ag in active], budget)
            last_price = price
            for ag in active:
                ag.settle(ag.bid / price)

    outcomes = tuple(
        UeOutcome(
            ue_id=ag.setup.id,
            cqi=ag.setup.cqi,
            allocated_w=ag.power_w if ag.power_w is not None else 0.0,
            reached_qos=(ag.power_w or 0.0) >= ag.setup.qos_power_w,
            exited=ag.state is UeState.EXITED,
            exit_iteration=ag.exit_iteration,
            power_limit_w=ag.setup.power_limit_w,
            qos_power_w=ag.setup.qos_power_w,
        )
        for ag in agents
    )
    return AllocationResult(
        p_total_w=p_total_w,
        outcomes=outcomes,
        iterations=rounds,
        converged=converged,
        infeasible=infeasible,
        shadow_price=last_price,
        trajectory=tuple(trajectory),
    )


def run_baseline(scenario) -> AllocationResult:
    """Baseline auction over a scenario: caps ignored, budget fully split."""
    return allocate(
        scenario.resolve(),
        scenario.p_total_w,
        scenario.convergence,
        enforce_limits=False,
    )


def run_with_power_limits(scenario) -> AllocationResult:
    """Power-limited auction: terminals exit when their demand crosses
    their cap, taking the demand with them.  Every terminal in the scenario
    must resolve a power limit."""
    return allocate(
        scenario.resolve(),
        scenario.p_total_w,
        scenario.convergence,
        enforce_limits=True,
    )
