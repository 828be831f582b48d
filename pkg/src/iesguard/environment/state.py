"""
Parameter sets and value records of the scheduling environment.

``SystemParams`` aggregates every constant the simulator needs; the four
operating scenarios are derived from it with :meth:`SystemParams.for_scenario`.
``EnvState`` is the full simulator state, ``Action`` a decoded scheduling
decision and ``DispatchResult`` the realized flows of one step.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..attack import DetectorSpec, ItdsaSpec
from ..devices import (
    HOURS_PER_DAY, BuildingParams, ComfortParams, ConverterParams, FlexLoadLedger, FlexLoadParams,
    StorageParams, building_heat_demand,
)
from ..exceptions import ValidationError
from ..fields import BooleanField, EmbeddedField, FloatField, ListField
from ..params import ParamSet
from ..pricing import PricingParams, TouSchedule

ACTION_NAMES = ('p_p2g', 'p_eb', 'q_mt', 'price_h', 'price_p', 'price_q')
OBS_NAMES = ('soc_esd', 'soc_hsd', 'price_e', 'price_g', 'wt', 'basic_e', 'basic_g', 'basic_h', 'hour')
ACTION_DIM = len(ACTION_NAMES)
OBS_DIM = len(OBS_NAMES)

SCENARIOS = {
    1: {'hsd_enabled': True, 'idr_enabled': True},
    2: {'hsd_enabled': True, 'idr_enabled': False},
    3: {'hsd_enabled': False, 'idr_enabled': True},
    4: {'hsd_enabled': False, 'idr_enabled': False},
}


def _default_hsd() -> StorageParams:
    return StorageParams(c_max=180.0, p_ch_max=90.0, p_dc_max=90.0, eta_ch=1.0, eta_dc=1.0)


class GridParams(ParamSet):
    """Exchange limits with the upstream power and gas grids."""
    p_grid_max = FloatField(min_value=0, default=1000.0, help="kW, symmetric buy/sell")
    q_grid_max = FloatField(min_value=0, default=80.0, help="m3/h, symmetric buy/sell")
    sell_ratio = FloatField(min_value=0, max_value=1, default=0.5)
    backup_heat_price = FloatField(min_value=0, default=1.0, help="CNY/kWh")


class PenaltyParams(ParamSet):
    """Ramp-overrun and heat-balance penalty coefficients.

    Rate limits are in normalized action units; unset limits are derived
    from the converter ramps (EB and prices are unlimited).
    """
    delta1 = ListField(FloatField(min_value=0), min_length=6, max_length=6, default=(1.0,) * 6)
    delta2 = ListField(FloatField(min_value=0), min_length=6, max_length=6, default=(1.0,) * 6)
    rate_up = ListField(FloatField(min_value=0), min_length=6, max_length=6, default=None)
    rate_down = ListField(FloatField(min_value=0), min_length=6, max_length=6, default=None)
    beta_lr = FloatField(min_value=0, default=5.0, help="CNY/kWh heat shortfall")
    beta_el = FloatField(min_value=0, default=5.0, help="CNY/kWh heat overrun")

    def rates(self, cp: ConverterParams) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(up, down)`` rate limits in normalized units."""
        p2g_span = cp.p2g_range[1] - cp.p2g_range[0]
        mt_span = cp.mt_range[1] - cp.mt_range[0]
        up = np.full(6, np.inf)
        down = np.full(6, np.inf)
        if p2g_span > 0:
            up[0], down[0] = 2 * cp.p2g_ramp[1] / p2g_span, -2 * cp.p2g_ramp[0] / p2g_span
        if mt_span > 0:
            up[2], down[2] = 2 * cp.mt_ramp[1] / mt_span, -2 * cp.mt_ramp[0] / mt_span
        if self.rate_up is not None:
            up = np.asarray(self.rate_up, dtype=np.float64)
        if self.rate_down is not None:
            down = np.asarray(self.rate_down, dtype=np.float64)
        return up, down


class SystemParams(ParamSet):
    """Every constant of the simulated integrated energy system."""
    building = EmbeddedField(BuildingParams)
    comfort = EmbeddedField(ComfortParams)
    esd = EmbeddedField(StorageParams)
    hsd = EmbeddedField(StorageParams, default=_default_hsd)
    converters = EmbeddedField(ConverterParams)
    grid = EmbeddedField(GridParams)
    flex = EmbeddedField(FlexLoadParams)
    pricing = EmbeddedField(PricingParams)
    penalty = EmbeddedField(PenaltyParams)
    itdsa = EmbeddedField(ItdsaSpec)
    detector = EmbeddedField(DetectorSpec)
    hsd_enabled = BooleanField(default=True)
    idr_enabled = BooleanField(default=True)

    def clean(self) -> None:
        if self.building.t_comfort != self.comfort.t_comfort:
            raise ValueError("building and comfort must agree on the comfort temperature")

    @property
    def effective_hsd(self) -> StorageParams:
        return self.hsd if self.hsd_enabled else self.hsd.disabled()

    def for_scenario(self, scenario: int) -> 'SystemParams':
        """Scenario 1: HSD + IDR, 2: HSD only, 3: IDR only, 4: neither."""
        if scenario not in SCENARIOS:
            raise ValidationError(f"scenario must be one of {sorted(SCENARIOS)}, got {scenario}",
                                  field_name='scenario')
        return self.replace(**SCENARIOS[scenario])


@dataclass(frozen=True)
class DayProfile:
    """Exogenous data for one 24-hour day."""
    t_out: Tuple[float, ...]
    wt: Tuple[float, ...]
    basic_e: Tuple[float, ...]
    basic_g: Tuple[float, ...]
    basic_h: Tuple[float, ...]
    tou: TouSchedule
    day_index: int = 0

    def __post_init__(self) -> None:
        for name in ('t_out', 'wt', 'basic_e', 'basic_g', 'basic_h'):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != HOURS_PER_DAY:
                raise ValidationError(f"{name} needs {HOURS_PER_DAY} values, got {len(values)}", field_name=name)
            if not np.all(np.isfinite(values)):
                raise ValidationError(f"{name} contains non-finite values", field_name=name)
            if name != 't_out' and min(values) < 0:
                raise ValidationError(f"{name} must be >= 0", field_name=name)
            object.__setattr__(self, name, values)


@dataclass(frozen=True)
class Action:
    """A decoded scheduling decision.

    The six named fields are the realized set-points after range, ramp and
    band clamping. ``requested`` holds the native values before the ramp
    clamp and ``raw`` the clipped policy output both used by the ramp-overrun
    penalty.
    """
    p_p2g: float
    p_eb: float
    q_mt: float
    price_h: float
    price_p: float
    price_q: float
    requested: Tuple[float, ...] = ()
    raw: Tuple[float, ...] = ()
    clamped: Tuple[bool, ...] = (False,) * ACTION_DIM
    ramp_infeasible: Tuple[bool, ...] = (False,) * ACTION_DIM

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in ACTION_NAMES])


@dataclass(frozen=True)
class EnvState:
    """Full simulator state at the start of step ``hour``.

    The exogenous fields (prices, wind, base demands) are those of ``hour``;
    at hour 24 they repeat hour 23. ``basic_h`` is the heat demand at the
    comfort temperature corrected for the building's current temperature.
    """
    hour: int
    c_esd: float
    c_hsd: float
    soc_esd: float
    soc_hsd: float
    grid_price_e: float
    grid_price_g: float
    wt: float
    t_out: float
    basic_e: float
    basic_g: float
    basic_h: float
    t_in_prev: float
    ledger_e: FlexLoadLedger
    ledger_g: FlexLoadLedger
    profile: DayProfile
    prev_action: Optional[Action] = None

    @property
    def done(self) -> bool:
        return self.hour >= HOURS_PER_DAY

    def native_observation(self) -> np.ndarray:
        return np.array([
            self.soc_esd, self.soc_hsd, self.grid_price_e, self.grid_price_g, self.wt,
            self.basic_e, self.basic_g, self.basic_h, float(min(self.hour, HOURS_PER_DAY - 1)),
        ])


def exogenous(profile: DayProfile, hour: int, t_in_prev: float, params: SystemParams) -> Dict[str, float]:
    """Exogenous state fields for ``hour`` (hour 24 reuses hour 23)."""
    h = min(hour, HOURS_PER_DAY - 1)
    b = params.building
    t_out = profile.t_out[h]
    correction = building_heat_demand(b.t_comfort, t_in_prev, t_out, b) - building_heat_demand(
        b.t_comfort, b.t_comfort, t_out, b)
    return {
        'grid_price_e': profile.tou.elec[h],
        'grid_price_g': profile.tou.gas[h],
        'wt': profile.wt[h],
        't_out': t_out,
        'basic_e': profile.basic_e[h],
        'basic_g': profile.basic_g[h],
        'basic_h': max(profile.basic_h[h] + correction, 0.0),
    }


@dataclass(frozen=True)
class DispatchResult:
    """Realized quantities of one step.

    Signed flows: ``p_grid``/``q_grid`` positive when buying, storage flows
    positive when discharging into the carrier.
    """
    hour: int
    action: Action
    levels: Tuple[float, float, float]
    sigma_e: float
    sigma_g: float
    # converters
    h_eb: float
    q_p2g: float
    p_mt: float
    h_mt: float
    # electricity
    p_load: float
    p_shift: float
    p_payback: float
    p_unserved: float
    wt_used: float
    wt_curtailed: float
    esd_ch: float
    esd_dc: float
    p_grid: float
    # gas
    q_load: float
    q_shift: float
    q_payback: float
    q_unserved: float
    q_flared: float
    q_grid: float
    # heat
    h_basic: float
    h_cut: float
    h_cut_max: float
    h_load: float
    hsd_ch: float
    hsd_dc: float
    h_backup: float
    h_dump: float
    # storage and ledgers after the step
    c_esd_next: float
    c_hsd_next: float
    c_hsd_prev: float
    ledger_e: FlexLoadLedger
    ledger_g: FlexLoadLedger
    # prices
    buy_e: float
    buy_g: float
    sell_e: float
    sell_g: float
    flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def p_buy(self) -> float:
        return max(self.p_grid, 0.0)

    @property
    def p_sell(self) -> float:
        return max(-self.p_grid, 0.0)

    @property
    def q_buy(self) -> float:
        return max(self.q_grid, 0.0)

    @property
    def q_sell(self) -> float:
        return max(-self.q_grid, 0.0)

    @property
    def p_served(self) -> float:
        return self.p_load - self.p_unserved

    @property
    def q_served(self) -> float:
        return self.q_load - self.q_unserved

    def balance_residuals(self) -> Tuple[float, float, float]:
        """Electric, gas and heat balance residuals over realized quantities."""
        a = self.action
        elec = (self.p_grid + self.wt_used + (self.esd_dc - self.esd_ch) + self.p_mt
                - a.p_eb - a.p_p2g - self.p_served)
        gas = self.q_grid + self.q_p2g - self.q_flared - a.q_mt - self.q_served
        heat = self.h_eb + self.h_mt + (self.hsd_dc - self.hsd_ch) + self.h_backup - self.h_dump - self.h_load
        return elec, gas, heat

    def to_row(self) -> Dict[str, Any]:
        """Flat record for dispatch traces."""
        a = self.action
        return {
            'hour': self.hour, 'p_p2g': a.p_p2g, 'p_eb': a.p_eb, 'q_mt': a.q_mt,
            'price_h': a.price_h, 'price_p': a.price_p, 'price_q': a.price_q,
            'h_eb': self.h_eb, 'q_p2g': self.q_p2g, 'p_mt': self.p_mt, 'h_mt': self.h_mt,
            'p_load': self.p_load, 'p_shift': self.p_shift, 'p_unserved': self.p_unserved,
            'wt_used': self.wt_used, 'wt_curtailed': self.wt_curtailed,
            'esd_flow': self.esd_dc - self.esd_ch, 'p_grid': self.p_grid,
            'q_load': self.q_load, 'q_shift': self.q_shift, 'q_unserved': self.q_unserved,
            'q_flared': self.q_flared, 'q_grid': self.q_grid,
            'h_load': self.h_load, 'h_cut': self.h_cut, 'hsd_flow': self.hsd_dc - self.hsd_ch,
            'h_backup': self.h_backup, 'h_dump': self.h_dump,
            'c_esd': self.c_esd_next, 'c_hsd': self.c_hsd_next,
        }


__all__ = [
    'GridParams', 'PenaltyParams', 'SystemParams', 'DayProfile', 'Action', 'EnvState', 'DispatchResult',
    'exogenous', 'ACTION_NAMES', 'OBS_NAMES', 'ACTION_DIM', 'OBS_DIM', 'SCENARIOS',
]
