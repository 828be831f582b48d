"""
Dynamic pricing: time-of-use benchmarks plus agent-chosen real-time offsets.

Real-time prices are affine in the demand-response price levels ς and are
clamped into per-carrier bands. ``levels_from_prices`` inverts the map after
clamping, which is how the environment turns the prices carried by an action
back into the levels the flexible loads respond to.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .devices import HOURS_PER_DAY, _check_hour
from .exceptions import PricingError, ValidationError
from .fields import FloatField
from .params import ParamSet

Triple = Tuple[float, float, float]

# (electric, gas, heat-cut) level ranges
LEVEL_RANGES: Tuple[Tuple[float, float], ...] = ((-2.0, 2.0), (-2.0, 2.0), (0.0, 1.0))


@dataclass(frozen=True)
class TouSchedule:
    """Hourly time-of-use prices for one day.

    Peak and off-peak scalars default to the day's max and min when left
    unset.
    """
    elec: Tuple[float, ...]
    gas: Tuple[float, ...]
    heat: Tuple[float, ...]
    elec_peak: Optional[float] = None
    elec_offpeak: Optional[float] = None
    gas_peak: Optional[float] = None
    gas_offpeak: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ('elec', 'gas', 'heat'):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != HOURS_PER_DAY:
                raise ValidationError(f"TOU {name} needs {HOURS_PER_DAY} hourly prices, got {len(values)}",
                                      field_name=name)
            if not all(np.isfinite(values)) or min(values) < 0:
                raise ValidationError(f"TOU {name} prices must be finite and >= 0", field_name=name)
            object.__setattr__(self, name, values)

        for carrier in ('elec', 'gas'):
            hourly = getattr(self, carrier)
            if getattr(self, f'{carrier}_peak') is None:
                object.__setattr__(self, f'{carrier}_peak', max(hourly))
            if getattr(self, f'{carrier}_offpeak') is None:
                object.__setattr__(self, f'{carrier}_offpeak', min(hourly))
            peak, off = getattr(self, f'{carrier}_peak'), getattr(self, f'{carrier}_offpeak')
            if not off <= min(hourly) or not max(hourly) <= peak:
                raise ValidationError(
                    f"TOU {carrier} prices must lie within [offpeak, peak] = [{off}, {peak}]",
                    field_name=carrier,
                )

    @classmethod
    def from_arrays(cls, elec: Sequence[float], gas: Sequence[float], heat: Sequence[float]) -> 'TouSchedule':
        return cls(tuple(elec), tuple(gas), tuple(heat))


class PricingParams(ParamSet):
    """Benchmark blend, level gains and band thresholds.

    Gains left unset are derived from the day's schedule so the full level
    range spans the band: ``k_p = (peak - offpeak) / 4`` (same for gas) and
    ``k_h = (l_h - 1) * mean(tou_h)``.
    """
    zeta_p = FloatField(min_value=0, min_exclusive=True, default=0.5)
    zeta_q = FloatField(min_value=0, min_exclusive=True, default=0.5)
    k_p = FloatField(min_value=0, min_exclusive=True, default=None)
    k_q = FloatField(min_value=0, min_exclusive=True, default=None)
    k_h = FloatField(min_value=0, min_exclusive=True, default=None)
    l_p = FloatField(min_value=0, min_exclusive=True, default=1.0)
    l_q = FloatField(min_value=0, min_exclusive=True, default=1.0)
    l_h = FloatField(min_value=1.0, default=1.5)


def resolve_gains(tou: TouSchedule, p: PricingParams) -> Triple:
    """Return ``(k_p, k_q, k_h)``, deriving unset gains from the schedule.

    Raises:
        PricingError: If a derived gain is zero (flat schedule, or l_h = 1)
    """
    k_p = p.k_p if p.k_p is not None else (tou.elec_peak - tou.elec_offpeak) / 4.0
    k_q = p.k_q if p.k_q is not None else (tou.gas_peak - tou.gas_offpeak) / 4.0
    k_h = p.k_h if p.k_h is not None else (p.l_h - 1.0) * float(np.mean(tou.heat))
    for name, gain in (('k_p', k_p), ('k_q', k_q), ('k_h', k_h)):
        if gain <= 0:
            raise PricingError(f"price gain {name} must be > 0, got {gain}")
    return k_p, k_q, k_h


def benchmarks(tou: TouSchedule, p: PricingParams, hour: int) -> Triple:
    """Benchmark prices: ζ(peak + offpeak) for electricity and gas, hourly TOU for heat."""
    hour = _check_hour(hour)
    return (
        p.zeta_p * (tou.elec_peak + tou.elec_offpeak),
        p.zeta_q * (tou.gas_peak + tou.gas_offpeak),
        tou.heat[hour],
    )


def price_bands(tou: TouSchedule, p: PricingParams, hour: int) -> Tuple[Tuple[float, float], ...]:
    """Allowed real-time price interval per carrier (electric, gas, heat)."""
    hour = _check_hour(hour)
    return (
        (p.l_p * tou.elec_offpeak, p.l_p * tou.elec_peak),
        (p.l_q * tou.gas_offpeak, p.l_q * tou.gas_peak),
        (tou.heat[hour], p.l_h * tou.heat[hour]),
    )


def _check_levels(levels: Sequence[float]) -> None:
    if len(levels) != 3:
        raise PricingError(f"expected 3 price levels, got {len(levels)}")
    for (lo, hi), level, name in zip(LEVEL_RANGES, levels, ('TSE', 'TSQ', 'CH')):
        if not np.isfinite(level) or not lo <= level <= hi:
            raise PricingError(f"price level {name}={level} outside [{lo}, {hi}]")


def realtime_prices(levels: Sequence[float], tou: TouSchedule, p: PricingParams, hour: int) -> Triple:
    """Map ``(ς_TSE, ς_TSQ, ς_CH)`` to clamped real-time prices ``(λ_P, λ_Q, λ_H)``.

    Raises:
        PricingError: If a level is outside its range
    """
    _check_levels(levels)
    gains = resolve_gains(tou, p)
    bench = benchmarks(tou, p, hour)
    bands = price_bands(tou, p, hour)
    # ordered (electric, gas, heat) like the levels
    return tuple(
        float(min(max(b + level * k, lo), hi))
        for b, level, k, (lo, hi) in zip(bench, levels, gains, bands)
    )


def levels_from_prices(prices: Sequence[float], tou: TouSchedule, p: PricingParams, hour: int) -> Triple:
    """Invert :func:`realtime_prices`: ``ς = (λ − ϖ_m) / k`` clamped into the level ranges."""
    if len(prices) != 3:
        raise PricingError(f"expected 3 prices, got {len(prices)}")
    gains = resolve_gains(tou, p)
    bench = benchmarks(tou, p, hour)
    return tuple(
        float(min(max((price - b) / k, lo), hi))
        for price, b, k, (lo, hi) in zip(prices, bench, gains, LEVEL_RANGES)
    )


__all__ = [
    'TouSchedule', 'PricingParams', 'LEVEL_RANGES',
    'resolve_gains', 'benchmarks', 'price_bands', 'realtime_prices', 'levels_from_prices',
]
