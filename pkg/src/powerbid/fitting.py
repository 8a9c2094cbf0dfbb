"""Least-squares fitting of sigmoid utility parameters to sampled curves.

Given (power, utility) samples this recovers the (a, b) shape parameters by
damped Gauss-Newton (Levenberg-Marquardt) with an analytic Jacobian.  The
solver is written out here rather than delegated to a generic optimizer
because the surrounding code depends on two contractual details a black box
does not promise: every accepted step strictly decreases the sum of squared
residuals (the damping parameter grows on rejection until it does), and the
iteration works in log-parameter space so a > 0, b > 0 holds by construction
with no clipping.

The damping schedule is the classic one: start at ``lambda0``, multiply by
``lambda_up`` on a rejected trial, divide by ``lambda_down`` on acceptance,
and scale the damping term by the diagonal of J^T J so it is invariant to
parameter scaling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .sigmoid import SigmoidUtility

__all__ = ["FitSample", "FitConfig", "FitResult", "fit_sigmoid", "jacobian", "read_samples"]


@dataclass(frozen=True)
class FitSample:
    power_w: float
    utility: float


@dataclass(frozen=True)
class FitConfig:
    """Solver knobs.  ``a0``/``b0`` default to a data-driven heuristic:
    b0 is the sample power whose utility is closest to one half (the
    inflection of a normalized sigmoid sits near half-maximum), a0 = 1."""

    a0: Optional[float] = None
    b0: Optional[float] = None
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    max_iterations: int = 200
    gradient_tolerance: float = 1e-8


@dataclass(frozen=True)
class FitResult:
    utility: SigmoidUtility
    converged: bool
    iterations: int
    sse: float
    gradient_norm: float
    message: str


def _curve(a: float, b: float, p: np.ndarray) -> np.ndarray:
    """Vectorized U(p) in the overflow-free form (1 - e^{-ap}) * logistic."""
    s = 1.0 / (1.0 + np.exp(-np.clip(a * (p - b), -700.0, 700.0)))
    return -np.expm1(-a * p) * s


def jacobian(utility: SigmoidUtility, powers_w: Sequence[float]) -> np.ndarray:
    """(n, 2) array of [dU/da, dU/db] at each power, in natural parameters.

    With A = 1 - e^{-ap} and S = logistic(a (p - b)):

        dU/da = p e^{-ap} S + A S (1 - S) (p - b)
        dU/db = -a A S (1 - S)
    """
    a, b = utility.a, utility.b
    p = np.asarray(powers_w, dtype=float)
    expo = np.exp(-a * p)
    A = -np.expm1(-a * p)
    S = 1.0 / (1.0 + np.exp(-np.clip(a * (p - b), -700.0, 700.0)))
    bell = S * (1.0 - S)
    dU_da = p * expo * S + A * bell * (p - b)
    dU_db = -a * A * bell
    return np.column_stack([dU_da, dU_db])


def read_samples(path: str | Path) -> list[FitSample]:
    """Load samples from a CSV file with header ``power_w,utility``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["power_w", "utility"]:
            raise ValueError(
                f"{path}: expected header 'power_w,utility', got {reader.fieldnames!r}"
            )
        out = []
        for k, row in enumerate(reader, start=2):
            try:
                out.append(FitSample(power_w=float(row["power_w"]), utility=float(row["utility"])))
            except (TypeError, ValueError):
                raise ValueError(f"{path}: line {k}: non-numeric sample {row!r}") from None
    return out


def fit_sigmoid(samples: Sequence[FitSample], config: FitConfig = FitConfig()) -> FitResult:
    """Fit (a, b) to samples by damped least squares.

    Raises ValueError on malformed input: fewer than 3 samples, negative
    powers, utilities outside [0, 1], or samples that never straddle the
    half-maximum level (the inflection heuristic and the fit itself are
    meaningless without coverage on both sides of u = 0.5).  Degenerate but
    well-formed input -- all utilities identical -- returns a result with
    ``converged = False`` instead of raising, since it can arise from real
    measurements (e.g. a saturated probe).

    The solver is a local method.  The default start (inflection at the
    half-maximum crossing, unit steepness) lands in the global basin for any
    input this function accepts; a manual start whose curve is already
    saturated across the sample range can instead settle on the family's
    degenerate b -> 0 boundary (a purely concave saturating shape).  Such a
    misfit is always visible in the result: check ``sse`` against the
    near-zero residual of a genuine fit.
    """
    if len(samples) < 3:
        raise ValueError(f"need at least 3 samples to fit 2 parameters, got {len(samples)}")
    p = np.array([s.power_w for s in samples], dtype=float)
    u = np.array([s.utility for s in samples], dtype=float)
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise ValueError("sample powers must be finite and >= 0")
    if not np.all(np.isfinite(u)) or np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("sample utilities must lie in [0, 1]")

    if float(u.max() - u.min()) == 0.0:
        return FitResult(
            utility=SigmoidUtility(a=1.0, b=max(float(p.mean()), 1e-6)),
            converged=False,
            iterations=0,
            sse=float(np.sum((u - u.mean()) ** 2)),
            gradient_norm=math.inf,
            message="degenerate input: utilities carry no variation",
        )
    if not (u.min() < 0.5 < u.max()):
        raise ValueError(
            "samples must straddle half-maximum utility (need points below and above 0.5)"
        )

    # Starting point: inflection near the half-maximum crossing, unit slope.
    b0 = config.b0 if config.b0 is not None else float(p[int(np.argmin(np.abs(u - 0.5)))])
    a0 = config.a0 if config.a0 is not None else 1.0
    if b0 <= 0.0:
        b0 = max(float(p[p > 0.0].min()) if np.any(p > 0.0) else 1.0, 1e-6)
    theta = np.array([math.log(a0), math.log(b0)])  # log-space keeps a, b > 0

    def unpack(th: np.ndarray) -> tuple[float, float]:
        return math.exp(th[0]), math.exp(th[1])

    def sse_at(th: np.ndarray) -> float:
        # A trial step can be finite in log space yet overflow exp(); such a
        # step is simply infinitely bad, and the damping loop will shrink it.
        try:
            a, b = unpack(th)
        except OverflowError:
            return math.inf
        if a <= 0.0 or b <= 0.0:  # exp() underflowed to zero
            return math.inf
        r = _curve(a, b, p) - u
        s = float(r @ r)
        return s if math.isfinite(s) else math.inf

    lam = config.lambda0
    sse = sse_at(theta)
    grad_norm = math.inf
    iterations = 0
    message = "iteration budget exhausted"
    converged = False

    while iterations < config.max_iterations:
        a, b = unpack(theta)
        r = _curve(a, b, p) - u
        J = jacobian(SigmoidUtility(a=a, b=b), p) * np.array([a, b])  # chain rule to log-space
        g = J.T @ r
        grad_norm = float(np.max(np.abs(g)))
        if grad_norm <= config.gradient_tolerance:
            converged = True
            message = "gradient below tolerance"
            break

        JtJ = J.T @ J
        damp = np.maximum(np.diag(JtJ), 1e-14)
        iterations += 1
        try:
            step = np.linalg.solve(JtJ + lam * np.diag(damp), -g)
        except np.linalg.LinAlgError:
            lam *= config.lambda_up
            continue
        trial = theta + step
        trial_sse = sse_at(trial) if np.all(np.isfinite(trial)) else math.inf
        if trial_sse < sse:
            theta, sse = trial, trial_sse
            lam /= config.lambda_down
        else:
            lam *= config.lambda_up
            if lam > 1e15:
                message = "stalled: damping exhausted without descent"
                break

    a, b = unpack(theta)
    if not converged:
        # Report the gradient at the point actually returned.
        r = _curve(a, b, p) - u
        J = jacobian(SigmoidUtility(a=a, b=b), p) * np.array([a, b])
        grad_norm = float(np.max(np.abs(J.T @ r)))
    return FitResult(
        utility=SigmoidUtility(a=a, b=b),
        converged=converged,
        iterations=iterations,
        sse=sse,
        gradient_norm=grad_norm,
        message=message,
    )
