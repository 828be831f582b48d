"""
Day-profile ingestion, synthetic generation and stress variants.

A profile file is a CSV with one row per hour and the columns of
``PROFILE_COLUMNS``; the row count must be a multiple of 24 and the ``hour``
column must run 0..23 within every day.
"""
import math
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import polars as pl

from ..devices import HOURS_PER_DAY, BuildingParams, building_heat_demand
from ..environment.state import DayProfile
from ..exceptions import ProfileError, ValidationError
from ..logging import logger
from ..pricing import TouSchedule
from ..utils.rng import make_rng

PROFILE_COLUMNS = ('hour', 't_out_c', 'wt_kw', 'basic_e_kw', 'basic_g_m3', 'basic_h_kw', 'tou_e', 'tou_g', 'tou_h')
STRESS_KINDS = ('wt_up', 'wt_down', 'load_up', 'load_down')

# Hour classes of the synthetic tariff
_PEAK_HOURS = frozenset(range(10, 15)) | frozenset(range(18, 21))
_OFFPEAK_HOURS = frozenset(range(0, 7)) | frozenset((22, 23))
TOU_LEVELS = {
    'elec': (0.4, 0.8, 1.2),
    'gas': (2.5, 3.0, 3.5),
    'heat': (0.3, 0.4, 0.5),
}


def _tariff(levels: Sequence[float]) -> tuple:
    off, shoulder, peak = levels
    return tuple(peak if h in _PEAK_HOURS else off if h in _OFFPEAK_HOURS else shoulder
                 for h in range(HOURS_PER_DAY))


def synthetic_tou() -> TouSchedule:
    """Three-level tariff: off-peak at night, peaks late morning and early evening."""
    return TouSchedule(_tariff(TOU_LEVELS['elec']), _tariff(TOU_LEVELS['gas']), _tariff(TOU_LEVELS['heat']))


def _bump(hours: np.ndarray, center: float, width: float) -> np.ndarray:
    return np.exp(-((hours - center) ** 2) / (2.0 * width ** 2))


def synthetic_day(rng: np.random.Generator, day_index: int = 0,
                  building: Optional[BuildingParams] = None, noise: bool = True) -> DayProfile:
    """One synthetic winter day.

    Outdoor temperature is a sinusoid around -3 °C with 5 °C amplitude
    (warmest at 15:00); electric and gas demands have morning and evening
    peaks; wind is stronger at night. ``basic_h_kw`` is the building's heat
    demand at the comfort temperature.
    """
    b = building or BuildingParams()
    h = np.arange(HOURS_PER_DAY, dtype=np.float64)
    scale = 1.0 if noise else 0.0

    t_out = -3.0 + 5.0 * np.sin(2.0 * math.pi * (h - 9.0) / HOURS_PER_DAY)
    t_out = t_out + scale * (rng.normal(0.0, 1.0) + rng.normal(0.0, 0.3, HOURS_PER_DAY))
    t_out = np.minimum(t_out, b.t_comfort)

    wt = 180.0 + 90.0 * np.cos(2.0 * math.pi * (h - 2.0) / HOURS_PER_DAY)
    wt = np.maximum(wt * (1.0 + scale * rng.normal(0.0, 0.15, HOURS_PER_DAY)), 0.0)

    basic_e = 220.0 + 160.0 * _bump(h, 9.0, 2.0) + 200.0 * _bump(h, 19.0, 2.0)
    basic_e = np.maximum(basic_e * (1.0 + scale * rng.normal(0.0, 0.05, HOURS_PER_DAY)), 0.0)

    basic_g = 15.0 + 12.0 * _bump(h, 8.0, 1.5) + 15.0 * _bump(h, 18.0, 1.5)
    basic_g = np.maximum(basic_g * (1.0 + scale * rng.normal(0.0, 0.05, HOURS_PER_DAY)), 0.0)

    basic_h = np.array([max(building_heat_demand(b.t_comfort, b.t_comfort, t, b), 0.0) for t in t_out])
    return DayProfile(tuple(t_out), tuple(wt), tuple(basic_e), tuple(basic_g), tuple(basic_h),
                      synthetic_tou(), day_index)


def generate_profiles(days: int, seed: Optional[int] = 0, building: Optional[BuildingParams] = None,
                      noise: bool = True) -> List[DayProfile]:
    """``days`` synthetic days drawn from one seeded generator."""
    if days <= 0:
        raise ValueError(f"days must be positive, got {days}")
    rng = make_rng(seed)
    return [synthetic_day(rng, k, building, noise) for k in range(days)]


def profiles_frame(profiles: Sequence[DayProfile]) -> pl.DataFrame:
    rows = []
    for p in profiles:
        for h in range(HOURS_PER_DAY):
            rows.append({
                'hour': h, 't_out_c': p.t_out[h], 'wt_kw': p.wt[h], 'basic_e_kw': p.basic_e[h],
                'basic_g_m3': p.basic_g[h], 'basic_h_kw': p.basic_h[h],
                'tou_e': p.tou.elec[h], 'tou_g': p.tou.gas[h], 'tou_h': p.tou.heat[h],
            })
    schema = {c: (pl.Int64 if c == 'hour' else pl.Float64) for c in PROFILE_COLUMNS}
    return pl.DataFrame(rows, schema=schema)


def write_profiles(profiles: Sequence[DayProfile], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    profiles_frame(profiles).write_csv(path)
    logger.info(f"Wrote {len(profiles)} day profiles to {path}")
    return path


def frame_to_profiles(frame: pl.DataFrame, source: str = '<frame>') -> List[DayProfile]:
    """Validate a profile table and split it into days.

    Raises:
        ProfileError: On missing columns, a row count that is not a multiple of
            24, a broken hour sequence or non-finite values
    """
    missing = [c for c in PROFILE_COLUMNS if c not in frame.columns]
    if missing:
        raise ProfileError(f"{source}: missing column(s) {', '.join(missing)}", field_name=missing[0])
    if frame.height == 0 or frame.height % HOURS_PER_DAY:
        raise ProfileError(f"{source}: {frame.height} rows is not a positive multiple of {HOURS_PER_DAY}")
    try:
        frame = frame.select(
            [pl.col('hour').cast(pl.Int64)] + [pl.col(c).cast(pl.Float64) for c in PROFILE_COLUMNS[1:]]
        )
    except pl.exceptions.PolarsError as exc:
        raise ProfileError(f"{source}: non-numeric profile values ({exc})") from exc

    values = {c: frame[c].to_numpy() for c in PROFILE_COLUMNS}
    days = frame.height // HOURS_PER_DAY
    if not np.array_equal(values['hour'], np.tile(np.arange(HOURS_PER_DAY), days)):
        raise ProfileError(f"{source}: hour column must run 0..{HOURS_PER_DAY - 1} for every day", field_name='hour')
    for c in PROFILE_COLUMNS[1:]:
        if not np.all(np.isfinite(values[c])):
            logger.warning(f"{source}: rejecting non-finite values in {c}")
            raise ProfileError(f"{source}: column {c} contains non-finite values", field_name=c)

    profiles = []
    for k in range(days):
        sl = slice(k * HOURS_PER_DAY, (k + 1) * HOURS_PER_DAY)
        day = {c: tuple(values[c][sl].tolist()) for c in PROFILE_COLUMNS[1:]}
        try:
            tou = TouSchedule(day['tou_e'], day['tou_g'], day['tou_h'])
            profiles.append(DayProfile(day['t_out_c'], day['wt_kw'], day['basic_e_kw'], day['basic_g_m3'],
                                       day['basic_h_kw'], tou, k))
        except ValidationError as exc:
            raise ProfileError(f"{source}: day {k}: {exc}") from exc
    return profiles


def load_profiles(path: Union[str, Path]) -> List[DayProfile]:
    """Read a profile CSV.

    Raises:
        ProfileError: If the file is missing or violates the column contract
    """
    path = Path(path)
    if not path.is_file():
        raise ProfileError(f"profile file {path} does not exist")
    try:
        frame = pl.read_csv(path)
    except pl.exceptions.PolarsError as exc:
        raise ProfileError(f"{path}: unreadable CSV ({exc})") from exc
    profiles = frame_to_profiles(frame, str(path))
    logger.debug(f"Loaded {len(profiles)} day profiles from {path}")
    return profiles


def apply_stress(day: DayProfile, kind: str, factor: float = 0.2) -> DayProfile:
    """Scale wind (``wt_up``/``wt_down``) or all base demands (``load_up``/``load_down``) by ``1 ± factor``."""
    if kind not in STRESS_KINDS:
        raise ValueError(f"unknown stress kind {kind!r}; expected one of {STRESS_KINDS}")
    if not 0.0 <= factor <= 1.0:
        raise ValueError(f"stress factor must be in [0, 1], got {factor}")
    m = 1.0 + factor if kind.endswith('_up') else 1.0 - factor

    def scaled(values):
        return tuple(v * m for v in values)

    if kind.startswith('wt'):
        return replace(day, wt=scaled(day.wt))
    return replace(day, basic_e=scaled(day.basic_e), basic_g=scaled(day.basic_g), basic_h=scaled(day.basic_h))


__all__ = [
    'PROFILE_COLUMNS', 'STRESS_KINDS', 'TOU_LEVELS', 'synthetic_tou', 'synthetic_day', 'generate_profiles',
    'profiles_frame', 'write_profiles', 'frame_to_profiles', 'load_profiles', 'apply_stress',
]
