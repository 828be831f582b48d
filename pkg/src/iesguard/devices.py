"""
Device, building and flexible-load models of the integrated energy system.

Everything here is a pure function over value types: parameter sets
(``ParamSet`` subclasses) for constants and frozen dataclasses for the few
records that change during an episode (flexible-load ledgers, storage
outcomes). Units: kW for power, kWh for energy, m³ (per hour) for gas, °C for
temperature, hours for time.

Hour convention: steps are 0-based. The daytime comfort band covers steps
7-18 (clock 8:00-19:00); every other step uses the night band.
"""
import math
from dataclasses import dataclass, field, replace as dc_replace
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ContractViolationError
from .fields import FloatField, IntField, ListField, StringField
from .logging import logger
from .params import ParamSet

HOURS_PER_DAY = 24
DAY_HOURS = range(7, 19)
SIGMA_MEAN, SIGMA_STD = 0.2, 0.2
ETA_MEAN, ETA_STD = 10.0, 6.0


def _check_hour(hour: int) -> int:
    if not 0 <= int(hour) < HOURS_PER_DAY:
        raise ContractViolationError(f"hour must be in [0, 24), got {hour}")
    return int(hour)


# ---------------------------------------------------------------------------
# Parameter sets
# ---------------------------------------------------------------------------

class BuildingParams(ParamSet):
    """Thermal envelope of the representative heated building.

    ``K`` is in W/(m²·°C) and ``c_air`` in kJ/(kg·°C); the derived properties
    convert them to kW/°C and kWh/°C so the transient balance works in kW.
    ``n_zones`` identical zones share one envelope model.
    """
    K = FloatField(min_value=0, min_exclusive=True, default=0.5, help="heat-transfer coefficient, W/(m2 C)")
    F = FloatField(min_value=0, min_exclusive=True, default=2400.0, help="surface area, m2")
    V = FloatField(min_value=0, min_exclusive=True, default=36000.0, help="volume, m3")
    c_air = FloatField(min_value=0, min_exclusive=True, default=1.007, help="specific heat of air, kJ/(kg C)")
    rho_air = FloatField(min_value=0, min_exclusive=True, default=1.2, help="air density, kg/m3")
    dt = FloatField(min_value=0, min_exclusive=True, default=1.0, help="step length, h")
    n_zones = IntField(min_value=1, default=8, help="identical zones served")
    t_comfort = FloatField(default=21.0, help="indoor comfort temperature, C")

    def clean(self) -> None:
        if self.dt != 1.0:
            raise ValueError("dt must be 1 h; the episode clock is hourly")

    @property
    def ua_kw(self) -> float:
        """Envelope conductance K·F in kW/°C."""
        return self.K * self.F / 1000.0

    @property
    def capacity_kwh(self) -> float:
        """Air heat capacity c·ρ·V in kWh/°C."""
        return self.c_air * self.rho_air * self.V / 3600.0

    @property
    def inertia_ratio(self) -> float:
        """Dimensionless r = K·F·Δt / (c·ρ·V)."""
        return self.ua_kw * self.dt / self.capacity_kwh

    @property
    def heat_slope(self) -> float:
        """∂H/∂T_in of the transient balance, all zones, in kW/°C."""
        return self.n_zones * self.ua_kw / (1.0 + self.inertia_ratio)


class ComfortParams(ParamSet):
    """Thermal-comfort constants for the PMV index.

    ``M`` left unset is calibrated so PMV(``t_comfort``) = 0.
    """
    T_s = FloatField(default=33.5, help="skin comfort temperature, C")
    M = FloatField(min_value=0, min_exclusive=True, default=None, help="metabolic rate; None calibrates")
    I_cl = FloatField(min_value=0, min_exclusive=True, default=1.5, help="clothing thermal resistance")
    day_band = FloatField(min_value=0, min_exclusive=True, default=0.5)
    night_band = FloatField(min_value=0, min_exclusive=True, default=0.9)
    t_comfort = FloatField(default=21.0)

    def clean(self) -> None:
        if self.day_band > self.night_band:
            raise ValueError("day_band must not exceed night_band")
        if self.M is None and self.T_s == self.t_comfort:
            raise ValueError("cannot calibrate M when T_s equals the comfort temperature")

    @property
    def metabolic_rate(self) -> float:
        if self.M is not None:
            return self.M
        return 3.76 * (self.T_s - self.t_comfort) / (2.43 * (self.I_cl + 0.1))


class StorageParams(ParamSet):
    """Electric or heat storage unit. ``c_min``/``c0`` default to 10% / 50% of ``c_max``."""
    c_max = FloatField(min_value=0, default=200.0, help="kWh")
    c_min = FloatField(min_value=0, default=None, help="kWh; None means 0.1 c_max")
    c0 = FloatField(min_value=0, default=None, help="kWh; None means 0.5 c_max")
    p_ch_max = FloatField(min_value=0, default=100.0, help="kW")
    p_dc_max = FloatField(min_value=0, default=100.0, help="kW")
    eta_ch = FloatField(min_value=0, max_value=1, min_exclusive=True, default=0.9)
    eta_dc = FloatField(min_value=0, max_value=1, min_exclusive=True, default=0.9)

    def clean(self) -> None:
        if not self.lower <= self.initial <= self.c_max:
            raise ValueError(f"need c_min <= c0 <= c_max, got {self.lower}, {self.initial}, {self.c_max}")

    @property
    def lower(self) -> float:
        return 0.1 * self.c_max if self.c_min is None else self.c_min

    @property
    def initial(self) -> float:
        return 0.5 * self.c_max if self.c0 is None else self.c0

    def disabled(self) -> 'StorageParams':
        """Return a zero-capacity, zero-power copy (storage absent)."""
        return self.replace(c_max=0.0, c_min=0.0, c0=0.0, p_ch_max=0.0, p_dc_max=0.0)


class ConverterParams(ParamSet):
    """Electric boiler, power-to-gas and micro gas turbine constants."""
    eb_eta = FloatField(min_value=0, max_value=1, min_exclusive=True, max_exclusive=True, default=0.99)
    eb_h_max = FloatField(min_value=0, default=300.0, help="kW heat")
    p2g_eta = FloatField(min_value=0, max_value=1, min_exclusive=True, max_exclusive=True, default=0.6)
    p2g_range = ListField(FloatField(min_value=0), min_length=2, max_length=2, default=(100.0, 500.0))
    p2g_ramp = ListField(FloatField(), min_length=2, max_length=2, default=(-200.0, 200.0))
    mt_eta_e = FloatField(min_value=0, max_value=1, min_exclusive=True, max_exclusive=True, default=0.4)
    mt_eta_h = FloatField(min_value=0, max_value=1, min_exclusive=True, max_exclusive=True, default=0.5)
    mt_eta_loss = FloatField(min_value=0, max_value=1, min_exclusive=True, max_exclusive=True, default=0.1)
    mt_range = ListField(FloatField(min_value=0), min_length=2, max_length=2, default=(10.0, 40.0))
    mt_ramp = ListField(FloatField(), min_length=2, max_length=2, default=(-10.0, 10.0))
    hhv = FloatField(min_value=0, min_exclusive=True, default=9.7, help="gas calorific value, kWh/m3")

    def clean(self) -> None:
        total = self.mt_eta_e + self.mt_eta_h + self.mt_eta_loss
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"MT efficiencies must sum to 1, got {total}")
        for name in ('p2g_range', 'p2g_ramp', 'mt_range', 'mt_ramp'):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} must be ordered, got ({lo}, {hi})")

    @property
    def eb_range(self) -> Tuple[float, float]:
        """Electric input range of the boiler, kW."""
        return 0.0, self.eb_h_max / self.eb_eta


class FlexLoadParams(ParamSet):
    """Sampling and compensation constants of the flexible loads."""
    sigma_mean = FloatField(default=SIGMA_MEAN)
    sigma_std = FloatField(min_value=0, default=SIGMA_STD)
    eta_mean = FloatField(default=ETA_MEAN, help="patience factor mean, h")
    eta_std = FloatField(min_value=0, default=ETA_STD)
    gamma_tse = FloatField(min_value=0, default=0.1, help="compensation, CNY/kWh shifted")
    gamma_tsq = FloatField(min_value=0, default=0.1, help="compensation, CNY/m3 shifted")
    gamma_ch = FloatField(min_value=0, default=0.1, help="compensation, CNY/kWh of cut heat")


# ---------------------------------------------------------------------------
# Flexible loads
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlexLoadLedger:
    """Time-shifted load bookkeeping for one carrier.

    ``outstanding`` holds ``(origin_hour, amount)`` pairs that have not been
    paid back yet; an entry is repaid at most once and then removed.
    """
    carrier: str
    basic_profile: Tuple[float, ...]
    sigma: float = SIGMA_MEAN
    eta_patience: float = ETA_MEAN
    outstanding: Tuple[Tuple[int, float], ...] = ()
    gamma_comp: float = 0.1

    def __post_init__(self) -> None:
        if self.carrier not in ('electric', 'gas'):
            raise ContractViolationError(f"carrier must be 'electric' or 'gas', got {self.carrier!r}")

    def with_sigma(self, sigma: float) -> 'FlexLoadLedger':
        return dc_replace(self, sigma=float(sigma))

    @property
    def outstanding_total(self) -> float:
        return float(sum(amount for _, amount in self.outstanding))


class FlexOutcome(NamedTuple):
    served: float
    shifted: float
    payback: float
    ledger: FlexLoadLedger
    # negative load below zero that the hour could not absorb
    forgone: float = 0.0


def sample_sigma(rng: np.random.Generator, mean: float = SIGMA_MEAN, std: float = SIGMA_STD) -> float:
    """Sensitivity factor σ ~ N(mean, std) clamped to [0, 1]."""
    return float(np.clip(rng.normal(mean, std), 0.0, 1.0))


def sample_patience(rng: np.random.Generator, mean: float = ETA_MEAN, std: float = ETA_STD) -> float:
    """Patience factor η ~ N(mean, std) clamped to [1, 24] hours."""
    return float(np.clip(rng.normal(mean, std), 1.0, 24.0))


def payback_probability(price_level: float, amount: float, elapsed: float, eta: float) -> float:
    """clip(−ς·sign(amount)/2 + elapsed/η, 0, 1)."""
    raw = -price_level * math.copysign(1.0, amount) / 2.0 + elapsed / eta
    return min(max(raw, 0.0), 1.0)


def flex_shift(ledger: FlexLoadLedger, hour: int, price_level: float,
               rng: np.random.Generator) -> FlexOutcome:
    """Serve one hour of a flexible load under price level ``price_level``.

    The shifted amount is ``basic·clip(σ·ς, −1, 1)``. Every outstanding entry
    is tested for payback (one uniform draw per entry, in ledger order) before
    the new shift is appended. Repayment depends on the draw only, so an entry
    whose probability has reached 1 always leaves the ledger. When negative
    paybacks exceed the hour's load, the served load is clamped at 0 and the
    excess is reported as ``forgone``.

    Args:
        ledger: Ledger carrying this step's sampled σ
        hour: Step index in [0, 24)
        price_level: ς in [−2, 2]
        rng: Generator for the payback draws

    Returns:
        FlexOutcome with served load, shifted amount, total payback and the
        updated ledger

    Raises:
        ContractViolationError: If ``hour`` is out of range or ς is not finite
    """
    hour = _check_hour(hour)
    if not math.isfinite(price_level):
        raise ContractViolationError(f"price level must be finite, got {price_level!r}")

    basic = float(ledger.basic_profile[hour])
    shifted = basic * min(max(ledger.sigma * price_level, -1.0), 1.0)
    served = basic - shifted

    payback = 0.0
    remaining = []
    for origin, amount in ledger.outstanding:
        prob = payback_probability(price_level, amount, hour - origin, ledger.eta_patience)
        draw = rng.random()
        if draw < prob:
            payback += amount
        else:
            remaining.append((origin, amount))

    if shifted != 0.0:
        remaining.append((hour, shifted))

    new_ledger = dc_replace(ledger, outstanding=tuple(remaining))
    total = served + payback
    if total < 0.0:
        logger.debug(f"{ledger.carrier} load at hour {hour}: payback {payback:.3f} exceeds load, "
                     f"{-total:.3f} forgone")
        return FlexOutcome(0.0, shifted, payback, new_ledger, -total)
    return FlexOutcome(total, shifted, payback, new_ledger)


# ---------------------------------------------------------------------------
# Comfort and building
# ---------------------------------------------------------------------------

def pmv(t_in: float, comfort: ComfortParams) -> float:
    """Predicted mean vote 2.43 − 3.76(T_s − T_in)/(M(I_cl + 0.1))."""
    return 2.43 - 3.76 * (comfort.T_s - t_in) / (comfort.metabolic_rate * (comfort.I_cl + 0.1))


def pmv_band(hour: int, comfort: Optional[ComfortParams] = None) -> float:
    """Allowed |PMV| for step ``hour``: day band on steps 7-18, night band otherwise."""
    hour = _check_hour(hour)
    day, night = (0.5, 0.9) if comfort is None else (comfort.day_band, comfort.night_band)
    return day if hour in DAY_HOURS else night


def band_min_temperature(band: float, comfort: ComfortParams) -> float:
    """Lowest indoor temperature with PMV ≥ −band."""
    return comfort.T_s - (2.43 + band) * comfort.metabolic_rate * (comfort.I_cl + 0.1) / 3.76


def building_heat_demand(t_in_target: float, t_in_prev: float, t_out: float, b: BuildingParams) -> float:
    """Heat (kW, all zones) that moves the building from ``t_in_prev`` to ``t_in_target``.

    Transient balance: H = K·F/(1+r)·[(T_in − T_out) + r(T_in,prev − T_out)]
    with r = K·F·Δt/(c·ρ·V), scaled by ``n_zones``.
    """
    r = b.inertia_ratio
    return b.heat_slope * ((t_in_target - t_out) + r * (t_in_prev - t_out))


def indoor_temp_from_heat(heat_kw: float, t_in_prev: float, t_out: float, b: BuildingParams) -> float:
    """Closed-form inverse of :func:`building_heat_demand` in ``T_in``."""
    return t_out + heat_kw / b.heat_slope - b.inertia_ratio * (t_in_prev - t_out)


def max_cuttable_heat(t_in_prev: float, t_out: float, hour: int, b: BuildingParams,
                      c: ComfortParams) -> float:
    """Largest heat cut that keeps |PMV| inside the hour's band.

    Equal to H(T_comfort) − H(T_band_min) at the same previous and outdoor
    temperatures; zero when the band minimum is not below comfort.
    """
    t_min = band_min_temperature(pmv_band(hour, c), c)
    if t_min >= b.t_comfort:
        return 0.0
    full = building_heat_demand(b.t_comfort, t_in_prev, t_out, b)
    reduced = building_heat_demand(t_min, t_in_prev, t_out, b)
    return max(full - reduced, 0.0)


# ---------------------------------------------------------------------------
# Storage and converters
# ---------------------------------------------------------------------------

class StorageOutcome(NamedTuple):
    c_next: float
    soc: float
    p_ch: float
    p_dc: float
    clamped: bool


def soc_of(c: float, s: StorageParams) -> float:
    return c / s.c_max if s.c_max > 0 else 0.0


def storage_step(c: float, p_ch: float, p_dc: float, s: StorageParams, dt: float = 1.0) -> StorageOutcome:
    """Advance a storage unit by one step.

    Requested powers beyond the power limits or the capacity window are
    clamped; the realized powers are returned with ``clamped`` set.

    Raises:
        ContractViolationError: On negative powers or simultaneous charge and
            discharge
    """
    if p_ch < 0 or p_dc < 0:
        raise ContractViolationError(f"storage powers must be >= 0, got p_ch={p_ch}, p_dc={p_dc}")
    if p_ch > 0 and p_dc > 0:
        raise ContractViolationError("storage cannot charge and discharge in the same step")

    ch = min(p_ch, s.p_ch_max, max(s.c_max - c, 0.0) / (s.eta_ch * dt))
    dc = min(p_dc, s.p_dc_max, max(c - s.lower, 0.0) * s.eta_dc / dt)
    clamped = ch < p_ch or dc < p_dc
    c_next = c + (s.eta_ch * ch - dc / s.eta_dc) * dt
    c_next = min(max(c_next, s.lower), s.c_max)
    return StorageOutcome(c_next, soc_of(c_next, s), ch, dc, clamped)


class ConverterOutput(NamedTuple):
    h_eb: float
    q_p2g: float
    p_mt: float
    h_mt: float


def _check_range(name: str, value: float, lo: float, hi: float) -> None:
    if not (lo - 1e-9 <= value <= hi + 1e-9):
        raise ContractViolationError(f"{name}={value} outside [{lo}, {hi}]; clamp before converting")


def converters(p_eb: float, p_p2g: float, q_mt: float, cp: ConverterParams,
               check_ranges: bool = True) -> ConverterOutput:
    """Evaluate boiler, power-to-gas and micro gas turbine outputs.

    With ``check_ranges`` the inputs must lie inside the operating ranges;
    pass ``False`` to evaluate the bare conversion formulas (zero inputs).

    Raises:
        ContractViolationError: If an input is outside its range
    """
    if check_ranges:
        _check_range('p_eb', p_eb, *cp.eb_range)
        _check_range('p_p2g', p_p2g, *cp.p2g_range)
        _check_range('q_mt', q_mt, *cp.mt_range)
    elif min(p_eb, p_p2g, q_mt) < 0:
        raise ContractViolationError("converter inputs must be >= 0")

    h_eb = cp.eb_eta * p_eb
    q_p2g = cp.p2g_eta * p_p2g / cp.hhv
    p_mt = (1.0 - cp.mt_eta_h - cp.mt_eta_loss) * q_mt * cp.hhv
    h_mt = (1.0 - cp.mt_eta_e - cp.mt_eta_loss) * q_mt * cp.hhv
    return ConverterOutput(h_eb, q_p2g, p_mt, h_mt)


class RampClamp(NamedTuple):
    value: float
    infeasible: bool


def clamp_ramp(requested: float, previous: Optional[float], value_range: Sequence[float],
               ramp: Sequence[float]) -> RampClamp:
    """Nearest value to ``requested`` inside the range and the ramp window.

    ``previous=None`` (first step) applies the range only. When the range
    and the ramp window do not intersect, the range endpoint nearest to the
    ramp window is returned and ``infeasible`` is set.
    """
    lo, hi = float(value_range[0]), float(value_range[1])
    if previous is None:
        return RampClamp(min(max(requested, lo), hi), False)
    r_lo, r_hi = previous + float(ramp[0]), previous + float(ramp[1])
    f_lo, f_hi = max(lo, r_lo), min(hi, r_hi)
    if f_lo > f_hi:
        return RampClamp(lo if r_hi < lo else hi, True)
    return RampClamp(min(max(requested, f_lo), f_hi), False)


__all__ = [
    'BuildingParams', 'ComfortParams', 'StorageParams', 'ConverterParams', 'FlexLoadParams',
    'FlexLoadLedger', 'FlexOutcome', 'StorageOutcome', 'ConverterOutput', 'RampClamp',
    'flex_shift', 'payback_probability', 'sample_sigma', 'sample_patience',
    'pmv', 'pmv_band', 'band_min_temperature', 'building_heat_demand', 'indoor_temp_from_heat',
    'max_cuttable_heat', 'storage_step', 'soc_of', 'converters', 'clamp_ramp', 'HOURS_PER_DAY',
]
