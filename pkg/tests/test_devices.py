"""Device, comfort and flexible-load models."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from iesguard.devices import (
    BuildingParams, ComfortParams, ConverterParams, FlexLoadLedger, StorageParams, band_min_temperature,
    building_heat_demand, clamp_ramp, converters, flex_shift, indoor_temp_from_heat, max_cuttable_heat,
    payback_probability, pmv, pmv_band, sample_patience, sample_sigma, storage_step,
)
from iesguard.exceptions import ContractViolationError

temps = st.floats(min_value=-30.0, max_value=40.0, allow_nan=False)


# ---------------------------------------------------------------------------
# Flexible loads
# ---------------------------------------------------------------------------

def _ledger(basic=100.0, sigma=0.2, eta=10.0, outstanding=()):
    return FlexLoadLedger('electric', (basic,) * 24, sigma, eta, tuple(outstanding))


def test_flex_zero_level_is_identity(rng):
    out = flex_shift(_ledger(), 5, 0.0, rng)
    assert out.served == 100.0
    assert out.shifted == 0.0
    assert out.payback == 0.0
    assert out.ledger.outstanding == ()


def test_flex_shift_amount(rng):
    out = flex_shift(_ledger(sigma=0.2), 3, 1.0, rng)
    assert out.shifted == pytest.approx(20.0)
    assert out.served - out.payback == pytest.approx(80.0)
    assert out.ledger.outstanding == ((3, pytest.approx(20.0)),)


def test_flex_shift_never_exceeds_basic(rng):
    out = flex_shift(_ledger(sigma=1.0), 0, 2.0, rng)
    assert out.shifted == pytest.approx(100.0)


def test_payback_probability_clipped():
    assert payback_probability(2.0, 1.0, 5, 10.0) == 0.0
    assert payback_probability(0.0, 1.0, 5, 10.0) == pytest.approx(0.5)
    assert payback_probability(0.0, -1.0, 40, 10.0) == 1.0


def test_overdue_entries_are_repaid_once(rng):
    ledger = _ledger(eta=5.0, outstanding=[(0, 10.0), (1, -4.0)])
    out = flex_shift(ledger, 20, 0.0, rng)
    assert out.payback == pytest.approx(6.0)
    assert out.served == pytest.approx(106.0)
    assert out.ledger.outstanding == ()


def test_large_negative_entry_is_repaid_on_a_small_load(rng):
    basic = (100.0,) * 12 + (10.0,) * 12
    ledger = FlexLoadLedger('electric', basic, 0.2, 2.0, ((0, -40.0),))
    out = flex_shift(ledger, 12, 0.0, rng)
    assert out.ledger.outstanding == ()
    assert out.payback == pytest.approx(-40.0)
    assert out.served == 0.0
    assert out.forgone == pytest.approx(30.0)


def test_overdue_entry_follows_payback_probability():
    # ς = 2, positive entry, elapsed 3 with η = 2: probability 0.5, no forced settlement
    ledger = _ledger(sigma=0.0, eta=2.0, outstanding=[(0, 5.0)])
    repaid = sum(flex_shift(ledger, 3, 2.0, np.random.default_rng(s)).ledger.outstanding == () for s in range(400))
    assert 140 < repaid < 260


@given(
    st.lists(st.floats(0.0, 200.0), min_size=24, max_size=24),
    st.lists(st.floats(-200.0, 200.0).filter(lambda a: a != 0.0), min_size=1, max_size=6),
    st.floats(1.0, 5.0),
    st.integers(0, 2 ** 31),
)
def test_ledger_empties_at_zero_level(basic, shifts, eta, seed):
    rng = np.random.default_rng(seed)
    ledger = FlexLoadLedger('gas', tuple(basic), 0.3, eta, tuple((0, a) for a in shifts))
    repaid = 0.0
    for hour in range(1, int(math.ceil(4 * eta)) + 1):
        out = flex_shift(ledger, hour, 0.0, rng)
        assert out.served >= 0.0
        assert out.served - out.forgone == pytest.approx(basic[hour] + out.payback, abs=1e-9)
        repaid += out.payback
        ledger = out.ledger
    assert ledger.outstanding == ()
    assert repaid == pytest.approx(sum(shifts), abs=1e-9)


def test_flex_rejects_bad_inputs(rng):
    with pytest.raises(ContractViolationError):
        flex_shift(_ledger(), 24, 0.0, rng)
    with pytest.raises(ContractViolationError):
        flex_shift(_ledger(), 3, math.nan, rng)
    with pytest.raises(ContractViolationError):
        FlexLoadLedger('heat', (1.0,) * 24)


def test_sampled_factors_are_clamped(rng):
    sigmas = [sample_sigma(rng) for _ in range(500)]
    etas = [sample_patience(rng) for _ in range(500)]
    assert 0.0 <= min(sigmas) and max(sigmas) <= 1.0
    assert 1.0 <= min(etas) and max(etas) <= 24.0


# ---------------------------------------------------------------------------
# Comfort and building
# ---------------------------------------------------------------------------

def test_pmv_reference_points():
    c = ComfortParams()
    assert pmv(c.T_s, c) == pytest.approx(2.43)
    assert pmv(21.0, c) == pytest.approx(0.0, abs=1e-12)


@given(temps)
def test_pmv_monotone(t):
    c = ComfortParams()
    assert pmv(t + 1.0, c) > pmv(t, c)


@pytest.mark.parametrize('hour, band', [(12, 0.5), (7, 0.5), (18, 0.5), (3, 0.9), (19, 0.9), (22, 0.9)])
def test_pmv_band(hour, band):
    assert pmv_band(hour) == band


def test_pmv_band_rejects_hour():
    with pytest.raises(ContractViolationError):
        pmv_band(24)


def test_band_minimum_temperatures():
    c = ComfortParams()
    assert band_min_temperature(0.5, c) == pytest.approx(18.43, abs=0.01)
    assert band_min_temperature(0.9, c) == pytest.approx(16.37, abs=0.01)
    assert pmv(band_min_temperature(0.5, c), c) == pytest.approx(-0.5)


def test_building_heat_demand_golden():
    b = BuildingParams()
    assert b.ua_kw == pytest.approx(1.2)
    assert b.capacity_kwh == pytest.approx(12.084)
    assert building_heat_demand(21.0, 21.0, 0.0, b) == pytest.approx(201.6)
    assert building_heat_demand(5.0, 5.0, 5.0, b) == 0.0


@given(temps, temps, temps)
def test_heat_demand_round_trip(target, prev, out):
    b = BuildingParams()
    heat = building_heat_demand(target, prev, out, b)
    assert indoor_temp_from_heat(heat, prev, out, b) == pytest.approx(target, abs=1e-9)


def test_night_band_allows_larger_cut():
    b, c = BuildingParams(), ComfortParams()
    day = max_cuttable_heat(21.0, 0.0, 12, b, c)
    night = max_cuttable_heat(21.0, 0.0, 3, b, c)
    assert 0.0 < day < night


def test_zero_width_band_has_no_cut():
    b = BuildingParams()
    c = ComfortParams(day_band=1e-12, night_band=1e-12)
    assert max_cuttable_heat(21.0, 0.0, 12, b, c) == pytest.approx(0.0, abs=1e-9)


@given(st.integers(0, 23), st.floats(0.0, 1.0), temps)
def test_cut_keeps_pmv_in_band(hour, fraction, t_out):
    b, c = BuildingParams(), ComfortParams()
    t_prev = 21.0
    cut = fraction * max_cuttable_heat(t_prev, t_out, hour, b, c)
    heat = building_heat_demand(b.t_comfort, t_prev, t_out, b) - cut
    t_in = indoor_temp_from_heat(heat, t_prev, t_out, b)
    assert abs(pmv(t_in, c)) <= pmv_band(hour, c) + 1e-9


# ---------------------------------------------------------------------------
# Storage and converters
# ---------------------------------------------------------------------------

def test_storage_examples():
    s = StorageParams()
    assert storage_step(100.0, 0.0, 0.0, s).c_next == 100.0
    out = storage_step(100.0, 10.0, 0.0, s)
    assert out.c_next == pytest.approx(109.0)
    assert storage_step(100.0, 0.0, 0.0, s).soc == pytest.approx(0.5)


def test_storage_clamps_and_rejects():
    s = StorageParams()
    out = storage_step(195.0, 100.0, 0.0, s)
    assert out.clamped
    assert out.c_next == pytest.approx(200.0)
    with pytest.raises(ContractViolationError):
        storage_step(100.0, 5.0, 5.0, s)
    with pytest.raises(ContractViolationError):
        storage_step(100.0, -1.0, 0.0, s)


@given(st.floats(20.0, 200.0), st.floats(0.0, 500.0), st.booleans())
def test_storage_stays_in_window(c, power, charge):
    s = StorageParams()
    out = storage_step(c, power if charge else 0.0, 0.0 if charge else power, s)
    assert s.lower - 1e-9 <= out.c_next <= s.c_max + 1e-9


def test_converter_examples():
    cp = ConverterParams()
    assert converters(0.0, 0.0, 0.0, cp, check_ranges=False) == (0.0, 0.0, 0.0, 0.0)
    out = converters(100.0, 100.0, 20.0, cp)
    assert out.h_eb == pytest.approx(99.0)
    assert out.p_mt == pytest.approx(77.6)
    assert out.h_mt == pytest.approx(97.0)
    assert out.q_p2g == pytest.approx(0.6 * 100.0 / 9.7)


@given(st.floats(10.0, 40.0))
def test_mt_energy_accounting(q):
    cp = ConverterParams()
    out = converters(0.0, 100.0, q, cp)
    assert out.p_mt + out.h_mt + cp.mt_eta_loss * q * cp.hhv == pytest.approx(q * cp.hhv, abs=1e-9)


def test_converter_range_error():
    with pytest.raises(ContractViolationError):
        converters(0.0, 50.0, 20.0, ConverterParams())


def test_clamp_ramp_examples():
    assert clamp_ramp(250.0, 200.0, (100.0, 500.0), (-200.0, 200.0)) == (250.0, False)
    assert clamp_ramp(500.0, 100.0, (100.0, 500.0), (-200.0, 200.0)).value == 300.0
    assert clamp_ramp(10.0, 40.0, (10.0, 40.0), (-10.0, 10.0)).value == 30.0
    assert clamp_ramp(600.0, None, (100.0, 500.0), (-200.0, 200.0)).value == 500.0


def test_clamp_ramp_flags_empty_window():
    out = clamp_ramp(5.0, 100.0, (0.0, 50.0), (-10.0, 10.0))
    assert out.infeasible
    assert out.value == 50.0


@given(st.floats(-100.0, 600.0), st.floats(100.0, 500.0))
def test_clamp_ramp_within_range(requested, previous):
    out = clamp_ramp(requested, previous, (100.0, 500.0), (-200.0, 200.0))
    assert 100.0 <= out.value <= 500.0
    assert abs(out.value - previous) <= 200.0 + 1e-9
    assert not np.isnan(out.value)
