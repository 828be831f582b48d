"""TOU benchmarks and dynamic price bands."""
import pytest
from hypothesis import given, strategies as st

from iesguard.exceptions import PricingError, ValidationError
from iesguard.harness.profiles import synthetic_tou
from iesguard.pricing import (
    LEVEL_RANGES, PricingParams, TouSchedule, benchmarks, levels_from_prices, price_bands, realtime_prices,
    resolve_gains,
)

TOU = synthetic_tou()
hours = st.integers(0, 23)


def test_benchmarks():
    b = benchmarks(TOU, PricingParams(), 12)
    assert b[0] == pytest.approx(0.8)
    assert b[1] == pytest.approx(3.0)
    for h in range(24):
        assert benchmarks(TOU, PricingParams(), h)[2] == TOU.heat[h]


def test_zero_zeta_rejected():
    with pytest.raises(ValidationError):
        PricingParams(zeta_p=0.0)


def test_derived_gains():
    k_p, k_q, k_h = resolve_gains(TOU, PricingParams())
    assert k_p == pytest.approx(0.2)
    assert k_q == pytest.approx(0.25)
    assert k_h > 0


def test_flat_schedule_has_no_gain():
    flat = TouSchedule((0.5,) * 24, (3.0,) * 24, (0.4,) * 24)
    with pytest.raises(PricingError):
        resolve_gains(flat, PricingParams())


def test_zero_levels_give_benchmarks():
    p = PricingParams()
    assert realtime_prices((0.0, 0.0, 0.0), TOU, p, 8) == pytest.approx(benchmarks(TOU, p, 8))


def test_affine_map_and_clamp():
    assert realtime_prices((1.0, 0.0, 0.0), TOU, PricingParams(k_p=0.2), 3)[0] == pytest.approx(1.0)
    assert realtime_prices((2.0, 0.0, 0.0), TOU, PricingParams(k_p=0.5), 3)[0] == pytest.approx(1.2)


def test_levels_out_of_range_rejected():
    with pytest.raises(PricingError):
        realtime_prices((2.5, 0.0, 0.0), TOU, PricingParams(), 3)
    with pytest.raises(PricingError):
        realtime_prices((0.0, 0.0, -0.1), TOU, PricingParams(), 3)
    with pytest.raises(PricingError):
        realtime_prices((0.0, float('nan'), 0.0), TOU, PricingParams(), 3)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 1), hours)
def test_prices_inside_bands(e, g, h, hour):
    prices = realtime_prices((e, g, h), TOU, PricingParams(), hour)
    for price, (lo, hi) in zip(prices, price_bands(TOU, PricingParams(), hour)):
        assert lo - 1e-12 <= price <= hi + 1e-12


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), hours)
def test_round_trip_inside_bands(fe, fg, fh, hour):
    p = PricingParams()
    bands = price_bands(TOU, p, hour)
    k_h = resolve_gains(TOU, p)[2]
    # heat prices above benchmark + k_h would need a level above 1
    spans = (bands[0][1] - bands[0][0], bands[1][1] - bands[1][0], min(bands[2][1] - bands[2][0], k_h))
    prices = tuple(lo + f * span for f, (lo, _), span in zip((fe, fg, fh), bands, spans))
    levels = levels_from_prices(prices, TOU, p, hour)
    for level, (lo, hi) in zip(levels, LEVEL_RANGES):
        assert lo <= level <= hi
    assert realtime_prices(levels, TOU, p, hour) == pytest.approx(prices, abs=1e-9)


def test_price_at_edge_recovers_clamped_level():
    p = PricingParams(k_p=0.5)
    edge = realtime_prices((2.0, 0.0, 0.0), TOU, p, 3)
    assert levels_from_prices(edge, TOU, p, 3)[0] == pytest.approx(0.8)


@given(st.floats(-1.8, 1.8), hours)
def test_monotone_inside_band(level, hour):
    p = PricingParams()
    lo = realtime_prices((level, 0.0, 0.0), TOU, p, hour)[0]
    hi = realtime_prices((level + 0.1, 0.0, 0.0), TOU, p, hour)[0]
    assert hi > lo
