"""Utility-curve properties: identities, stability, and oracle cross-checks.

The closed forms in powerbid.sigmoid are verified against independent
computations done here in the test: bisection for the inverse, central
finite differences for the log-slope.  No expected value below was copied
from the implementation.
"""

import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from powerbid.cqi import ALL_CQIS, catalog_entry, utility_for_cqi
from powerbid.sigmoid import SigmoidUtility, logistic

# Moderate parameter box for property tests: steep enough to be interesting,
# well inside double-precision range for every intermediate.
A_RANGE = st.floats(min_value=0.05, max_value=5.0)
B_RANGE = st.floats(min_value=0.5, max_value=50.0)


def bisect_inverse(u: SigmoidUtility, target: float, tol: float = 1e-12) -> float:
    """Independent inverse: bisection on evaluate() itself."""
    lo, hi = 0.0, u.b + 60.0 / u.a  # U(hi) > 1 - 1e-26, safely above any target < 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if u.evaluate(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def central_diff_log_slope(u: SigmoidUtility, p: float, h: float = 1e-5) -> float:
    return (math.log(u.evaluate(p + h)) - math.log(u.evaluate(p - h))) / (2.0 * h)


# -- exact identities --------------------------------------------------------

def test_zero_power_gives_exactly_zero_utility():
    for cqi in ALL_CQIS:
        assert utility_for_cqi(cqi).evaluate(0.0) == 0.0


def test_value_at_inflection_matches_textbook_constants():
    # U(b) = c * (1/2 - d) in the textbook parameterization; the stable
    # evaluation path must agree with the constants to float precision.
    for cqi in ALL_CQIS:
        u = utility_for_cqi(cqi)
        expected = u.c * (0.5 - u.d)
        assert u.evaluate(u.b) == pytest.approx(expected, rel=1e-14)


def test_slope_at_inflection_matches_textbook_constants():
    # d/dp ln U at p=b is a/4 / (1/2 - d): U'(b) = c a sigma(1-sigma) = c a / 4.
    for cqi in ALL_CQIS:
        u = utility_for_cqi(cqi)
        assert u.slope(u.b) == pytest.approx(0.25 * u.a / (0.5 - u.d), rel=1e-12)


def test_utility_saturates_to_one():
    # Analytically sup U = 1 is never attained; in doubles the saturation
    # value rounds up to exactly 1.0, and must never exceed it.
    for cqi in ALL_CQIS:
        u = utility_for_cqi(cqi)
        assert u.evaluate(u.saturation_power()) > 1.0 - 1e-12
        assert u.evaluate(u.saturation_power()) <= 1.0


def test_worst_class_near_saturation_at_its_qos_power():
    u = utility_for_cqi(1)
    assert u.evaluate(catalog_entry(1).qos_power_w) > 0.999


def test_normalization_constants():
    u = SigmoidUtility(a=1.0, b=2.0)
    assert u.c == pytest.approx((1.0 + math.exp(2.0)) / math.exp(2.0), rel=1e-15)
    assert u.d == pytest.approx(1.0 / (1.0 + math.exp(2.0)), rel=1e-15)
    # extreme a*b: the textbook constants overflow, the stable path must not
    extreme = SigmoidUtility(a=5.0, b=400.0)
    assert extreme.c == 1.0 and extreme.d == 0.0
    assert 0.0 < extreme.evaluate(400.0) < 1.0


# -- inverse vs bisection oracle --------------------------------------------

@pytest.mark.parametrize("target", [0.01, 0.1, 0.5, 0.9, 0.99])
def test_inverse_agrees_with_bisection(target):
    for cqi in ALL_CQIS:
        u = utility_for_cqi(cqi)
        closed = u.inverse(target)
        assert closed == pytest.approx(bisect_inverse(u, target), abs=1e-9)
        assert u.evaluate(closed) == pytest.approx(target, abs=1e-9)


def test_inverse_spot_values():
    # Values derived by bisection on the utility itself (and pinned): the
    # best class hits 95% utility near 4.60 W, the worst near 9.62 W.  Note
    # these are far from the catalog's configured QoS powers -- that
    # discrepancy is intentional and documented (see cqi module docstring).
    assert utility_for_cqi(15).inverse(0.95) == pytest.approx(4.5997, abs=5e-4)
    assert utility_for_cqi(1).inverse(0.95) == pytest.approx(9.6249, abs=5e-4)


def test_inverse_diverges_toward_saturation():
    u = utility_for_cqi(8)
    targets = [0.9, 0.99, 0.999, 0.9999]
    powers = [u.inverse(t) for t in targets]
    assert powers == sorted(powers)
    assert powers[-1] > powers[0] + 3.0 / u.a  # each extra nine costs ~ln(10)/a watts


# -- slope vs finite differences ---------------------------------------------

@pytest.mark.parametrize("p", [1.0, 5.0, 10.0, 20.0])
def test_slope_matches_central_difference(p):
    for cqi in ALL_CQIS:
        u = utility_for_cqi(cqi)
        s = u.slope(p)
        fd = central_diff_log_slope(u, p)
        assert abs(s - fd) <= 1e-6 * (1.0 + abs(s))


# -- validation ---------------------------------------------------------------

def test_rejects_bad_parameters():
    for a, b in [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0),
                 (math.nan, 1.0), (1.0, math.inf)]:
        with pytest.raises(ValueError):
            SigmoidUtility(a=a, b=b)


def test_rejects_bad_powers():
    u = utility_for_cqi(5)
    with pytest.raises(ValueError):
        u.evaluate(-0.1)
    with pytest.raises(ValueError):
        u.evaluate(math.nan)
    with pytest.raises(ValueError):
        u.slope(0.0)  # log-slope diverges at the origin
    with pytest.raises(ValueError):
        u.slope(-1.0)
    for bad in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            u.inverse(bad)


def test_logistic_extremes():
    assert logistic(0.0) == 0.5
    assert logistic(800.0) == 1.0
    assert logistic(-800.0) == 0.0
    # 1 - logistic(3) cancels a couple of low bits; allow a 1-ulp-ish slack.
    assert logistic(-3.0) == pytest.approx(1.0 - logistic(3.0), abs=1e-15)


# -- properties ----------------------------------------------------------------

@given(a=A_RANGE, b=B_RANGE, data=st.data())
def test_strictly_increasing_below_saturation(a, b, data):
    # Window and separation are sized so the true increase is comfortably
    # above double resolution everywhere (worst case: both points near the
    # top of the window at the smallest steepness).
    u = SigmoidUtility(a=a, b=b)
    hi = u.b + 20.0 / u.a
    p1 = data.draw(st.floats(min_value=0.0, max_value=hi))
    p2 = data.draw(st.floats(min_value=0.0, max_value=hi))
    p1, p2 = min(p1, p2), max(p1, p2)
    assume(p2 - p1 > 1e-3)
    assert u.evaluate(p2) > u.evaluate(p1)


@given(a=A_RANGE, b=B_RANGE, t=st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
def test_inverse_roundtrip(a, b, t):
    u = SigmoidUtility(a=a, b=b)
    p = u.inverse(t)
    assert p > 0.0
    assert u.evaluate(p) == pytest.approx(t, abs=1e-9)


@given(a=A_RANGE, b=B_RANGE, data=st.data())
def test_slope_strictly_decreasing(a, b, data):
    # Strict decrease is asserted only where it is float-representable: far
    # below the inflection both slope terms saturate and the computed value
    # plateaus at exactly ``a``, so the window starts at b - 25/a.
    u = SigmoidUtility(a=a, b=b)
    lo = max(1e-6, u.b - 25.0 / u.a)
    hi = u.b + 25.0 / u.a
    p1 = data.draw(st.floats(min_value=lo, max_value=hi))
    p2 = data.draw(st.floats(min_value=lo, max_value=hi))
    p1, p2 = min(p1, p2), max(p1, p2)
    assume(p2 - p1 > 1e-3)
    assert u.slope(p1) > u.slope(p2)


@given(a=A_RANGE, b=B_RANGE, p=st.floats(min_value=0.0, max_value=500.0))
def test_range_is_unit_interval(a, b, p):
    # Closed upper bound: deep saturation rounds to exactly 1.0 in doubles.
    u = SigmoidUtility(a=a, b=b)
    v = u.evaluate(p)
    assert 0.0 <= v <= 1.0
