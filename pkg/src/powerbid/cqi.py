"""Channel-quality-indicator catalog: modulation, rate, and utility shapes.

One row per CQI index 1..15.  The modulation / code-rate / efficiency columns
describe the downlink transport format the indicator maps to; ``a`` and ``b``
are the fitted sigmoid parameters for that class's packet-success utility
(steepness and inflection power, see :mod:`powerbid.sigmoid`); ``qos_power_w``
is the class's configured QoS operating point -- the per-user transmit power
treated as "enough" for the class, used both as the default per-user power cap
and as the threshold for the reached-QoS flag.

Note the QoS power column is a configured input, not derived from the utility
curves: inverting the class utility at the default 95% target gives visibly
different powers (e.g. ~9.6 W instead of 23.2 W for CQI 1).  Both views are
exposed -- ``qos_power_w`` here, ``SigmoidUtility.inverse`` for the analytic
one -- and the discrepancy is asserted, not hidden, in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sigmoid import SigmoidUtility

__all__ = ["CqiClass", "catalog_entry", "utility_for_cqi", "qos_power_for_cqi", "ALL_CQIS"]

ALL_CQIS = range(1, 16)


@dataclass(frozen=True)
class CqiClass:
    cqi: int
    modulation: str
    code_rate_x1024: int
    efficiency_bits_per_symbol: float
    a: float
    b: float
    qos_power_w: float


#          cqi  modulation  rate   efficiency      a        b       qos_W
_TABLE = (
    (1,  "QPSK",    78, 0.1523, 0.8676,  6.2257, 23.240),
    (2,  "QPSK",   120, 0.2344, 0.8761,  6.1657, 18.210),
    (3,  "QPSK",   193, 0.3880, 0.8466,  6.3812, 17.650),
    (4,  "QPSK",   308, 0.6016, 0.8244,  6.5526, 14.720),
    (5,  "QPSK",   449, 0.8770, 0.8789,  6.1467, 13.760),
    (6,  "QPSK",   602, 1.1758, 1.0188,  5.3029, 11.910),
    (7,  "16QAM",  378, 1.4766, 0.5077,  9.8303, 11.350),
    (8,  "16QAM",  490, 1.9141, 0.6086,  8.1999, 11.060),
    (9,  "16QAM",  616, 2.4063, 0.7524,  6.6333, 10.790),
    (10, "64QAM",  466, 2.7305, 0.3697, 12.5005, 10.690),
    (11, "64QAM",  567, 3.3223, 0.4722,  9.7873, 10.650),
    (12, "64QAM",  666, 3.9023, 0.6248,  7.3974, 10.260),
    (13, "64QAM",  722, 4.5234, 0.8376,  5.5177,  9.181),
    (14, "64QAM",  873, 5.1152, 1.1510,  4.0153,  7.485),
    (15, "64QAM",  948, 5.5547, 1.6471,  2.8058,  5.213),
)

_BY_CQI = {row[0]: CqiClass(*row) for row in _TABLE}


def catalog_entry(cqi: int) -> CqiClass:
    """Full catalog row for ``cqi``; raises ValueError outside 1..15."""
    # isinstance check: dict lookup would happily accept 7.0 or True.
    if isinstance(cqi, bool) or not isinstance(cqi, int) or not 1 <= cqi <= 15:
        raise ValueError(f"cqi must be an integer in 1..15, got {cqi!r}")
    return _BY_CQI[cqi]


def utility_for_cqi(cqi: int) -> SigmoidUtility:
    """Sigmoid utility curve for a CQI class."""
    row = catalog_entry(cqi)
    return SigmoidUtility(a=row.a, b=row.b)


def qos_power_for_cqi(cqi: int) -> float:
    """Configured QoS operating power (watts) for a CQI class."""
    return catalog_entry(cqi).qos_power_w
