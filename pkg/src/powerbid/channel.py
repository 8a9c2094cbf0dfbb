"""Distance-based channel model: path loss and CQI zone lookup.

Two small pieces used when a scenario describes users by distance from the
base station instead of by CQI directly:

* :class:`PathLossModel` -- a simplified power-law received-power model,

      P_rx = P_tx * f / (c * (4 pi d)^alpha)

  with carrier frequency f (Hz), speed of light c, distance d (m) and path
  loss exponent alpha.  Deliberate modeling caveat: the exponent applies to
  the whole ``4 pi d`` product and the frequency ratio enters linearly, so
  this is *not* the textbook free-space form (which would square f/c and
  reduce to alpha = 2); the simplified form is kept as-is because the zone
  boundaries and reference results downstream were produced with it.

* :class:`CqiZoneMap` -- an explicit piecewise-constant map from distance to
  CQI, half-open intervals [d_lo, d_hi), CQI decreasing as distance grows.
  Keeping the map explicit (rather than thresholding the path-loss output)
  makes scenario files auditable and sidesteps the caveat above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

__all__ = ["SPEED_OF_LIGHT_M_S", "PathLossModel", "CqiZone", "CqiZoneMap"]

SPEED_OF_LIGHT_M_S = 2.99792458e8


@dataclass(frozen=True)
class PathLossModel:
    """Power-law path loss with carrier frequency and environment exponent.

    Defaults correspond to a 2 GHz carrier in a dense-urban environment
    (alpha = 3.5).
    """

    frequency_hz: float = 2.0e9
    path_loss_exponent: float = 3.5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.frequency_hz) and self.frequency_hz > 0.0):
            raise ValueError(f"frequency_hz must be positive, got {self.frequency_hz!r}")
        if not (math.isfinite(self.path_loss_exponent) and self.path_loss_exponent > 0.0):
            raise ValueError(
                f"path_loss_exponent must be positive, got {self.path_loss_exponent!r}"
            )

    def received_power_w(self, transmit_power_w: float, distance_m: float) -> float:
        """Received power at ``distance_m`` meters for a given transmit power."""
        if not (math.isfinite(transmit_power_w) and transmit_power_w >= 0.0):
            raise ValueError(f"transmit power must be >= 0, got {transmit_power_w!r}")
        if not (math.isfinite(distance_m) and distance_m > 0.0):
            raise ValueError(f"distance must be > 0, got {distance_m!r}")
        return (
            transmit_power_w
            * self.frequency_hz
            / (SPEED_OF_LIGHT_M_S * (4.0 * math.pi * distance_m) ** self.path_loss_exponent)
        )


@dataclass(frozen=True)
class CqiZone:
    """Half-open distance band [d_lo_m, d_hi_m) mapped to one CQI."""

    cqi: int
    d_lo_m: float
    d_hi_m: float


@dataclass(frozen=True)
class CqiZoneMap:
    """Ordered distance bands; nearer bands must carry higher CQI.

    Validation enforces: bands sorted by distance, non-overlapping (gaps are
    allowed and resolve to "no coverage"), strictly decreasing CQI with
    distance, and each CQI within the catalog range.
    """

    zones: tuple[CqiZone, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.zones:
            raise ValueError("zone map needs at least one zone")
        object.__setattr__(self, "zones", tuple(self.zones))
        prev: Optional[CqiZone] = None
        for z in self.zones:
            if not (1 <= z.cqi <= 15):
                raise ValueError(f"zone cqi {z.cqi!r} outside 1..15")
            if not (0.0 <= z.d_lo_m < z.d_hi_m and math.isfinite(z.d_hi_m)):
                raise ValueError(f"zone [{z.d_lo_m!r}, {z.d_hi_m!r}) is not a valid interval")
            if prev is not None:
                if z.d_lo_m < prev.d_hi_m:
                    raise ValueError(
                        f"zones overlap: [{prev.d_lo_m}, {prev.d_hi_m}) and "
                        f"[{z.d_lo_m}, {z.d_hi_m})"
                    )
                if z.cqi >= prev.cqi:
                    raise ValueError(
                        f"cqi must strictly decrease with distance "
                        f"(got {prev.cqi} then {z.cqi})"
                    )
            prev = z

    def cqi_of_distance(self, distance_m: float) -> Optional[int]:
        """CQI for a distance, or None when the distance falls in no band."""
        if not (math.isfinite(distance_m) and distance_m > 0.0):
            raise ValueError(f"distance must be > 0, got {distance_m!r}")
        for z in self.zones:
            if z.d_lo_m <= distance_m < z.d_hi_m:
                return z.cqi
        return None

    @classmethod
    def equal_annuli(cls, cell_radius_m: float, cqis: Sequence[int] = tuple(range(15, 0, -1))) -> "CqiZoneMap":
        """Equal-width rings covering [0, cell_radius_m), best CQI innermost."""
        if not (math.isfinite(cell_radius_m) and cell_radius_m > 0.0):
            raise ValueError(f"cell radius must be > 0, got {cell_radius_m!r}")
        n = len(cqis)
        width = cell_radius_m / n
        zones = tuple(
            CqiZone(cqi=c, d_lo_m=k * width, d_hi_m=(k + 1) * width)
            for k, c in enumerate(cqis)
        )
        return cls(zones=zones)
