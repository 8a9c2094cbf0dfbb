"""Independent solvers for checking the bidding allocator's answers.

The bidding loop in :mod:`powerbid.bidding` is a distributed fixed-point
iteration; nothing in it certifies optimality.  This module attacks the same
optimization problem

    maximize   sum_i ln U_i(P_i)
    subject to sum_i P_i = P_T,   P_i >= epsilon

head-on, by two methods that share no code with the allocator:

* :func:`solve_projected_gradient` -- vectorized gradient ascent with exact
  Euclidean projection onto the budget simplex and a halving step-size
  schedule that enforces monotone ascent.  Scales to any number of users
  and converges to slope-equalization at machine precision on the problem
  sizes used here.
* :func:`solve_grid_search` -- brute-force enumeration over an axis grid,
  feasible only for up to three users, but about as assumption-free as a
  check can get.

The objective is strictly concave on the positive orthant -- each user's
log-utility slope is strictly decreasing in power -- so the problem has a
unique optimum and first-order conditions certify it.  The grid search is
belt and braces: it would catch a systematic error baked into both gradient
implementations (allocator and oracle share the same slope algebra, even
though the code paths differ).  Agreement of all three is what the tests
treat as ground truth.

:func:`kkt_check` reports how close an allocation is to the first-order
optimality signature: equal log-utility slopes across users, full budget
use, strictly positive powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sigmoid import SigmoidUtility

__all__ = [
    "OracleSolution",
    "KktReport",
    "solve_projected_gradient",
    "solve_grid_search",
    "kkt_check",
    "project_to_budget",
]


@dataclass(frozen=True)
class OracleSolution:
    powers_w: tuple[float, ...]
    objective: float
    converged: bool
    iterations: int
    final_step_size: float
    message: str


@dataclass(frozen=True)
class KktReport:
    slopes: tuple[float, ...]
    slope_spread_rel: float      # (max - min) / median slope
    budget_slack_w: float        # P_T - sum(P); ~0 at an optimum
    min_power_w: float

    def equalized(self, rel_tol: float = 1e-3) -> bool:
        return self.slope_spread_rel <= rel_tol


def _params(utilities: Sequence[SigmoidUtility]) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([u.a for u in utilities], dtype=float)
    b = np.array([u.b for u in utilities], dtype=float)
    return a, b


def _log_utility_sum(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    """sum_i ln U_i(x_i), stable for x > 0: ln(1 - e^{-ax}) + ln logistic."""
    ax = a * x
    # ln(1 - e^{-ax}) = ln(-expm1(-ax)); ln logistic(t) = -ln(1 + e^{-t})
    t = a * (x - b)
    return float(np.sum(np.log(-np.expm1(-ax)) - np.logaddexp(0.0, -t)))


def _log_utility_grad(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """d/dx_i of the summed log-utility (the per-user slope, vectorized)."""
    ax = a * x
    e = np.exp(-ax)
    boundary = e / -np.expm1(-ax)
    logistic_tail = 1.0 / (1.0 + np.exp(np.clip(a * (x - b), -700.0, 700.0)))
    return a * (boundary + logistic_tail)


def project_to_budget(x: np.ndarray, p_total_w: float, floor_w: float) -> np.ndarray:
    """Euclidean projection onto {x : x_i >= floor, sum x_i = p_total}.

    Shift by the floor and project onto the scaled simplex by the sorting
    construction: find the largest k such that the top-k entries stay
    positive after the water-filling shift, then clamp.
    """
    n = x.size
    budget = p_total_w - n * floor_w
    if budget <= 0.0:
        raise ValueError(
            f"budget {p_total_w} cannot cover the floor {floor_w} for {n} users"
        )
    y = x - floor_w
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - budget
    ks = np.arange(1, n + 1)
    mask = u - css / ks > 0.0
    k = int(np.nonzero(mask)[0][-1]) + 1
    tau = css[k - 1] / k
    return np.maximum(y - tau, 0.0) + floor_w


def solve_projected_gradient(
    utilities: Sequence[SigmoidUtility],
    p_total_w: float,
    steps: int = 20_000,
    step_size: float = 5.0,
    floor_w: float = 1e-9,
) -> OracleSolution:
    """Monotone projected gradient ascent from the uniform allocation.

    Any trial step that fails to improve the objective halves the step size
    and is retried on the next iteration; the run is declared non-converged
    only if the step size collapses entirely (60 halvings) before the
    iteration budget is spent.
    """
    if not utilities:
        raise ValueError("need at least one utility")
    if not (math.isfinite(p_total_w) and p_total_w > 0.0):
        raise ValueError(f"p_total_w must be positive and finite, got {p_total_w!r}")
    a, b = _params(utilities)
    n = a.size
    if p_total_w <= n * floor_w:
        raise ValueError(f"budget {p_total_w} too small for {n} users at floor {floor_w}")

    x = np.full(n, p_total_w / n)
    obj = _log_utility_sum(a, b, x)
    step = float(step_size)
    halvings = 0
    it = 0
    for it in range(1, steps + 1):
        g = _log_utility_grad(a, b, x)
        trial = project_to_budget(x + step * g, p_total_w, floor_w)
        trial_obj = _log_utility_sum(a, b, trial)
        if trial_obj >= obj - 1e-15:
            x, obj = trial, trial_obj
        else:
            step *= 0.5
            halvings += 1
            if halvings > 60:
                return OracleSolution(
                    powers_w=tuple(float(v) for v in x),
                    objective=obj,
                    converged=False,
                    iterations=it,
                    final_step_size=step,
                    message="step size collapsed before the iteration budget",
                )
    return OracleSolution(
        powers_w=tuple(float(v) for v in x),
        objective=obj,
        converged=True,
        iterations=it,
        final_step_size=step,
        message="iteration budget completed with monotone ascent",
    )


def solve_grid_search(
    utilities: Sequence[SigmoidUtility],
    p_total_w: float,
    resolution_w: float = 0.01,
) -> OracleSolution:
    """Exhaustive search on an axis grid; the last user takes the remainder.

    Cost grows as (P_T / resolution)^(n-1), so this refuses more than three
    users.  The answer is within the grid resolution of the continuous
    optimum in each coordinate, which is all a cross-check needs.
    """
    n = len(utilities)
    if n == 0 or n > 3:
        raise ValueError(f"grid search supports 1..3 users, got {n}")
    if not (math.isfinite(p_total_w) and p_total_w > 0.0):
        raise ValueError(f"p_total_w must be positive and finite, got {p_total_w!r}")
    if not (math.isfinite(resolution_w) and 0.0 < resolution_w < p_total_w):
        raise ValueError(f"resolution_w must lie in (0, p_total_w), got {resolution_w!r}")
    a, b = _params(utilities)

    if n == 1:
        x = np.array([p_total_w])
        return OracleSolution(
            powers_w=(p_total_w,),
            objective=_log_utility_sum(a, b, x),
            converged=True,
            iterations=1,
            final_step_size=resolution_w,
            message="single user takes the whole budget",
        )

    axis = np.arange(resolution_w, p_total_w, resolution_w)
    best_obj = -math.inf
    best: tuple[float, ...] = ()
    evaluated = 0
    if n == 2:
        x2 = p_total_w - axis
        valid = x2 > 0.0
        x1v, x2v = axis[valid], x2[valid]
        objs = (
            np.log(-np.expm1(-a[0] * x1v)) - np.logaddexp(0.0, -a[0] * (x1v - b[0]))
            + np.log(-np.expm1(-a[1] * x2v)) - np.logaddexp(0.0, -a[1] * (x2v - b[1]))
        )
        k = int(np.argmax(objs))
        best_obj, best = float(objs[k]), (float(x1v[k]), float(x2v[k]))
        evaluated = int(valid.sum())
    else:
        term1 = np.log(-np.expm1(-a[0] * axis)) - np.logaddexp(0.0, -a[0] * (axis - b[0]))
        term2_axis = np.log(-np.expm1(-a[1] * axis)) - np.logaddexp(0.0, -a[1] * (axis - b[1]))
        for i, x1 in enumerate(axis):
            x3 = p_total_w - x1 - axis
            valid = x3 > 0.0
            if not np.any(valid):
                continue
            x2v, x3v = axis[valid], x3[valid]
            objs = (
                term1[i]
                + term2_axis[valid]
                + np.log(-np.expm1(-a[2] * x3v)) - np.logaddexp(0.0, -a[2] * (x3v - b[2]))
            )
            k = int(np.argmax(objs))
            if float(objs[k]) > best_obj:
                best_obj = float(objs[k])
                best = (float(x1), float(x2v[k]), float(x3v[k]))
            evaluated += int(valid.sum())
    return OracleSolution(
        powers_w=best,
        objective=best_obj,
        converged=True,
        iterations=evaluated,
        final_step_size=resolution_w,
        message="exhaustive grid scan",
    )


def kkt_check(
    utilities: Sequence[SigmoidUtility],
    powers_w: Sequence[float],
    p_total_w: float,
) -> KktReport:
    """First-order optimality report for an allocation.

    At an interior optimum of the equality-constrained problem every user's
    log-utility slope equals the shadow price, so the relative spread of the
    slopes is the natural optimality residual.
    """
    if len(utilities) != len(powers_w):
        raise ValueError(f"{len(utilities)} utilities vs {len(powers_w)} powers")
    slopes = tuple(u.slope(p) for u, p in zip(utilities, powers_w))
    median = float(np.median(np.array(slopes)))
    spread = (max(slopes) - min(slopes)) / median if median > 0.0 else math.inf
    return KktReport(
        slopes=slopes,
        slope_spread_rel=spread,
        budget_slack_w=p_total_w - math.fsum(powers_w),
        min_power_w=min(powers_w),
    )
