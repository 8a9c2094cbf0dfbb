"""Normalized sigmoidal utility of transmit power.

Each user's satisfaction as a function of allocated downlink power is modeled
as a logistic curve that has been shifted and rescaled so that zero power
gives exactly zero utility and the utility saturates at (but never reaches) 1:

    U(p) = c * (sigma(p) - d),   sigma(p) = 1 / (1 + exp(-a (p - b)))

with c = (1 + exp(a b)) / exp(a b) and d = 1 / (1 + exp(a b)).  The steepness
`a` and the inflection power `b` (watts) are per-user shape parameters; for
users identified by a channel quality indicator they come from the embedded
catalog in :mod:`powerbid.cqi`.

Numerics
--------
The textbook form above overflows for moderate ``a * b`` (exp(a*b) exceeds
float range near a*b ~ 709).  Everything here is computed through the
algebraically identical form

    U(p) = (1 - exp(-a p)) * logistic(a (p - b))

which stays inside float range for any positive parameters.  Equality with
the textbook form is covered by tests against direct high-precision
evaluation on parameter ranges where both are representable.

The bidding algorithm never needs U' directly; it prices power against the
derivative of log-utility ("log-slope"),

    slope(p) = d/dp ln U(p)
             = a * [ exp(-a p) / (1 - exp(-a p)) + logistic(a (b - p)) ]

which is strictly decreasing on (0, inf), diverges like 1/p at the origin
and decays to zero as p grows.  Strict monotonicity makes slope a bijection
onto (0, inf), so every positive price maps to exactly one utility-optimal
power -- the property the per-user subproblem solver in
:mod:`powerbid.bidding` relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["SigmoidUtility", "logistic"]


def logistic(x: float) -> float:
    """Standard logistic 1/(1+e^-x), safe against overflow for any float x."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    t = math.exp(x)
    return t / (1.0 + t)


@dataclass(frozen=True)
class SigmoidUtility:
    """Sigmoid utility curve with steepness ``a`` and inflection power ``b``.

    The normalization constants ``c`` and ``d`` are derived from (a, b) at
    construction and exposed read-only; they satisfy U(0) = 0 and
    sup U = c * (1 - d) = 1.
    """

    a: float
    b: float
    c: float = field(init=False, repr=False)
    d: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"steepness a must be positive and finite, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b > 0.0):
            raise ValueError(f"inflection b must be positive and finite, got {self.b!r}")
        # d = 1/(1+e^{ab}) computed overflow-free; c = 1 + e^{-ab}.
        q = math.exp(-self.a * self.b)
        object.__setattr__(self, "c", 1.0 + q)
        object.__setattr__(self, "d", q / (1.0 + q))

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, power_w: float) -> float:
        """Utility at ``power_w`` watts.  Result lies in [0, 1]: the supremum
        1 is never attained analytically, but deep in saturation the nearest
        double is 1.0 and that is what is returned.

        Raises ValueError for negative power; U(0) is exactly 0.0.
        """
        if not (math.isfinite(power_w) and power_w >= 0.0):
            raise ValueError(f"power must be finite and >= 0, got {power_w!r}")
        if power_w == 0.0:
            return 0.0
        return -math.expm1(-self.a * power_w) * logistic(self.a * (power_w - self.b))

    def slope(self, power_w: float) -> float:
        """Derivative of ln U at ``power_w`` (strictly positive, strictly
        decreasing in power).  Defined only for power > 0 -- the log-slope
        diverges at the origin.

        Far below the inflection (a*power large while a*(b - power) is also
        large) the true value sits within one part in 1e16 of ``a`` and the
        returned double plateaus at exactly ``a``; strict decrease is only
        observable where the change is representable.
        """
        if not (math.isfinite(power_w) and power_w > 0.0):
            raise ValueError(f"log-slope needs power > 0, got {power_w!r}")
        x = self.a * power_w
        t = math.exp(-x)                      # underflows harmlessly to 0.0
        boundary = t / -math.expm1(-x)        # e^{-ap} / (1 - e^{-ap})
        return self.a * (boundary + logistic(self.a * (self.b - power_w)))

    def inverse(self, target: float) -> float:
        """Power (watts) at which the utility equals ``target``.

        Closed form.  ``target`` must lie in the open interval (0, 1); the
        required power diverges as target -> 1 because the curve only
        saturates asymptotically.
        """
        if not (0.0 < target < 1.0):
            raise ValueError(f"target utility must lie in (0, 1), got {target!r}")
        # Solving c*(sigma - d) = target for the logistic argument gives
        # sigma_t = (target + q)/(1 + q) with q = e^{-ab}; then
        # p = b + ln(sigma_t/(1-sigma_t))/a with 1-sigma_t = (1-target)/(1+q).
        q = math.exp(-self.a * self.b)
        return self.b + (math.log(target + q) - math.log1p(-target)) / self.a

    def saturation_power(self, margin: float = 40.0) -> float:
        """Power beyond which the curve is flat to within ~e^-margin of 1.

        Convenience bound used for plotting grids and oracle brackets; at the
        default margin the utility exceeds 1 - 1e-12 for every catalog entry.
        """
        return self.b + margin / self.a
