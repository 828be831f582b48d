"""
Action decoding, dispatch closure and step accounting.

Closure order per carrier:

* heat: converters first, then the heat storage absorbs or covers the
  mismatch; what it cannot take is dumped, what it cannot cover is bought
  as backup heat;
* electricity: the electric storage charges on surplus and discharges on
  deficit, the grid takes the remainder within its exchange limit; deficit
  beyond the limit is unserved load, surplus beyond it curtails wind;
* gas: the gas grid supplies ``Q_load + Q_MT − Q_P2G`` within its limit;
  deficit beyond it is unserved gas load, surplus is flared.

In the last step of the day both storages are driven toward their initial
capacity instead of following the mismatch.
"""
from typing import Optional, Tuple

import numpy as np

from ..devices import (
    HOURS_PER_DAY, StorageOutcome, StorageParams, clamp_ramp, converters, flex_shift, max_cuttable_heat,
    sample_sigma, storage_step,
)
from ..exceptions import ContractViolationError
from ..pricing import benchmarks, levels_from_prices, price_bands
from .state import ACTION_DIM, Action, DispatchResult, EnvState, SystemParams

LAST_HOUR = HOURS_PER_DAY - 1


def action_ranges(state: EnvState, params: SystemParams) -> Tuple[Tuple[float, float], ...]:
    """Native range of each action component at the state's hour."""
    cp = params.converters
    hour = min(state.hour, LAST_HOUR)
    (p_lo, p_hi), (q_lo, q_hi), (h_lo, h_hi) = price_bands(state.profile.tou, params.pricing, hour)
    return (
        tuple(cp.p2g_range),
        cp.eb_range,
        tuple(cp.mt_range),
        (h_lo, h_hi),
        (p_lo, p_hi),
        (q_lo, q_hi),
    )


def normalize_action(values: np.ndarray, ranges) -> np.ndarray:
    """Native action values to policy units (-1 at the lower bound, +1 at the upper)."""
    out = np.zeros(len(ranges))
    for i, (lo, hi) in enumerate(ranges):
        out[i] = 0.0 if hi == lo else 2.0 * (values[i] - lo) / (hi - lo) - 1.0
    return out


def decode_action(raw: np.ndarray, state: EnvState, params: SystemParams) -> Action:
    """Map a policy output in [-1, 1]^6 to a feasible scheduling decision.

    Components are mapped affinely onto their ranges; P2G and MT are then
    clamped to the ramp window around the previous decision. Without demand
    response the prices are pinned to their benchmarks.

    Raises:
        ContractViolationError: If ``raw`` has the wrong width or is not finite
    """
    raw = np.asarray(raw, dtype=np.float64).reshape(-1)
    if raw.shape != (ACTION_DIM,):
        raise ContractViolationError(f"action must have {ACTION_DIM} components, got {raw.shape}")
    if not np.all(np.isfinite(raw)):
        raise ContractViolationError(f"action must be finite, got {raw}")

    clipped = np.clip(raw, -1.0, 1.0)
    ranges = action_ranges(state, params)
    requested = [lo + (r + 1.0) / 2.0 * (hi - lo) for r, (lo, hi) in zip(clipped, ranges)]
    clamped = [bool(c != r) for c, r in zip(clipped, raw)]
    infeasible = [False] * ACTION_DIM
    realized = list(requested)

    prev = state.prev_action
    cp = params.converters
    for i, name, value_range, ramp in ((0, 'p_p2g', cp.p2g_range, cp.p2g_ramp), (2, 'q_mt', cp.mt_range, cp.mt_ramp)):
        result = clamp_ramp(requested[i], None if prev is None else getattr(prev, name), value_range, ramp)
        realized[i] = result.value
        clamped[i] = clamped[i] or result.value != requested[i]
        infeasible[i] = result.infeasible

    if not params.idr_enabled:
        bench_p, bench_q, bench_h = benchmarks(state.profile.tou, params.pricing, min(state.hour, LAST_HOUR))
        realized[3], realized[4], realized[5] = bench_h, bench_p, bench_q

    return Action(*realized, requested=tuple(requested), raw=tuple(clipped),
                  clamped=tuple(clamped), ramp_infeasible=tuple(infeasible))


def _storage_request(c: float, mismatch: float, s: StorageParams, settle: bool) -> Tuple[float, float]:
    """Charge/discharge request for a storage unit: follow the mismatch or settle to ``c0``."""
    if settle:
        gap = s.initial - c
        if gap > 0:
            return gap / s.eta_ch, 0.0
        return 0.0, -gap * s.eta_dc
    return (mismatch, 0.0) if mismatch > 0 else (0.0, -mismatch)


def _run_storage(c: float, mismatch: float, s: StorageParams, settle: bool) -> StorageOutcome:
    p_ch, p_dc = _storage_request(c, mismatch, s, settle)
    return storage_step(c, p_ch, p_dc, s)


def dispatch(state: EnvState, action: Action, params: SystemParams, rng: np.random.Generator) -> DispatchResult:
    """Serve loads, run converters and close every carrier balance for one step.

    Consumes from ``rng`` in a fixed order: electric σ, gas σ, electric
    paybacks, gas paybacks.
    """
    hour = state.hour
    if not 0 <= hour < HOURS_PER_DAY:
        raise ContractViolationError(f"cannot dispatch at hour {hour}")
    tou = state.profile.tou
    settle = hour == LAST_HOUR
    flags = {}

    # (a) demand response
    if params.idr_enabled:
        levels = levels_from_prices((action.price_p, action.price_q, action.price_h), tou, params.pricing, hour)
    else:
        levels = (0.0, 0.0, 0.0)
    flex = params.flex
    sigma_e = sample_sigma(rng, flex.sigma_mean, flex.sigma_std)
    sigma_g = sample_sigma(rng, flex.sigma_mean, flex.sigma_std)
    elec = flex_shift(state.ledger_e.with_sigma(sigma_e), hour, levels[0], rng)
    gas = flex_shift(state.ledger_g.with_sigma(sigma_g), hour, levels[1], rng)

    h_cut_max = max_cuttable_heat(state.t_in_prev, state.t_out, hour, params.building, params.comfort)
    h_cut = min(levels[2] * h_cut_max, state.basic_h)
    h_load = state.basic_h - h_cut

    # (b) converters
    conv = converters(action.p_eb, action.p_p2g, action.q_mt, params.converters, check_ranges=False)

    # (c) heat
    hsd = params.effective_hsd
    heat_mismatch = conv.h_eb + conv.h_mt - h_load
    hsd_out = _run_storage(state.c_hsd, heat_mismatch, hsd, settle)
    heat_left = heat_mismatch - hsd_out.p_ch + hsd_out.p_dc
    h_dump, h_backup = max(heat_left, 0.0), max(-heat_left, 0.0)
    flags['heat_dumped'] = h_dump > 1e-9
    flags['heat_backup'] = h_backup > 1e-9

    # (d) electricity
    esd = params.esd
    p_mismatch = state.wt + conv.p_mt - elec.served - action.p_eb - action.p_p2g
    esd_out = _run_storage(state.c_esd, p_mismatch, esd, settle)
    p_left = p_mismatch - esd_out.p_ch + esd_out.p_dc
    p_grid = -p_left
    limit = params.grid.p_grid_max
    p_unserved = wt_curtailed = 0.0
    if p_grid > limit:
        p_unserved = min(p_grid - limit, elec.served)
        p_grid = p_grid - p_unserved
    elif p_grid < -limit:
        wt_curtailed = min(-limit - p_grid, state.wt)
        p_grid = p_grid + wt_curtailed
    flags['electric_unserved'] = p_unserved > 1e-9
    flags['wind_curtailed'] = wt_curtailed > 1e-9
    flags['grid_limit_exceeded'] = abs(p_grid) > limit + 1e-9

    # (e) gas
    q_grid = gas.served + action.q_mt - conv.q_p2g
    q_limit = params.grid.q_grid_max
    q_unserved = q_flared = 0.0
    if q_grid > q_limit:
        q_unserved = min(q_grid - q_limit, gas.served)
        q_grid = q_grid - q_unserved
    elif q_grid < -q_limit:
        q_flared = min(-q_limit - q_grid, conv.q_p2g)
        q_grid = q_grid + q_flared
    flags['gas_unserved'] = q_unserved > 1e-9
    flags['gas_flared'] = q_flared > 1e-9
    flags['gas_limit_exceeded'] = abs(q_grid) > q_limit + 1e-9
    flags['action_clamped'] = any(action.clamped)
    flags['ramp_infeasible'] = any(action.ramp_infeasible)

    ratio = params.grid.sell_ratio
    return DispatchResult(
        hour=hour, action=action, levels=tuple(levels), sigma_e=sigma_e, sigma_g=sigma_g,
        h_eb=conv.h_eb, q_p2g=conv.q_p2g, p_mt=conv.p_mt, h_mt=conv.h_mt,
        p_load=elec.served, p_shift=elec.shifted, p_payback=elec.payback, p_unserved=p_unserved,
        wt_used=state.wt - wt_curtailed, wt_curtailed=wt_curtailed,
        esd_ch=esd_out.p_ch, esd_dc=esd_out.p_dc, p_grid=p_grid,
        q_load=gas.served, q_shift=gas.shifted, q_payback=gas.payback, q_unserved=q_unserved,
        q_flared=q_flared, q_grid=q_grid,
        h_basic=state.basic_h, h_cut=h_cut, h_cut_max=h_cut_max, h_load=h_load,
        hsd_ch=hsd_out.p_ch, hsd_dc=hsd_out.p_dc, h_backup=h_backup, h_dump=h_dump,
        c_esd_next=esd_out.c_next, c_hsd_next=hsd_out.c_next, c_hsd_prev=state.c_hsd,
        ledger_e=elec.ledger, ledger_g=gas.ledger,
        buy_e=state.grid_price_e, buy_g=state.grid_price_g,
        sell_e=ratio * state.grid_price_e, sell_g=ratio * state.grid_price_g,
        flags=flags,
    )


def revenue_and_cost(d: DispatchResult, params: SystemParams) -> Tuple[float, float]:
    """Operator income and operating cost of one step, in CNY."""
    a = d.action
    rev = (a.price_p * d.p_served + a.price_q * d.q_served + a.price_h * d.h_load
           + d.sell_e * d.p_sell + d.sell_g * d.q_sell)
    flex = params.flex
    cost = (d.buy_e * d.p_buy + d.buy_g * d.q_buy
            + flex.gamma_ch * d.h_cut
            + flex.gamma_tse * max(d.p_shift, 0.0) + flex.gamma_tsq * max(d.q_shift, 0.0)
            + params.grid.backup_heat_price * d.h_backup)
    return rev, cost


def ramp_penalty(requested: np.ndarray, previous: Optional[np.ndarray], up: np.ndarray, down: np.ndarray,
                 delta1: np.ndarray, delta2: np.ndarray) -> float:
    """Action change-rate overrun penalty in normalized action units."""
    if previous is None:
        return 0.0
    change = np.asarray(requested) - np.asarray(previous)
    over_up = np.maximum(change - up, 0.0)
    over_down = np.maximum(-change - down, 0.0)
    return float(np.dot(delta1, over_up) + np.dot(delta2, over_down))


def heat_penalty(h_eb: float, h_mt: float, h_load: float, c_hsd_prev: float, c_max: float,
                 beta_lr: float, beta_el: float) -> float:
    """Demand-side shortfall or supply-side overrun penalty of the heat system."""
    supply = h_eb + h_mt
    if supply + c_hsd_prev < h_load:
        return beta_lr * (h_load - (supply + c_hsd_prev))
    if supply > h_load + c_max - c_hsd_prev:
        return beta_el * (supply - (h_load + c_max - c_hsd_prev))
    return 0.0


def penalties(state: EnvState, action: Action, d: DispatchResult, params: SystemParams) -> Tuple[float, float]:
    """Return ``(c1, c2)``: ramp overrun and heat-balance penalties."""
    pen = params.penalty
    up, down = pen.rates(params.converters)
    previous = None
    if state.prev_action is not None:
        previous = normalize_action(state.prev_action.as_vector(), action_ranges(state, params))
    requested = np.asarray(action.raw) if action.raw else normalize_action(action.as_vector(),
                                                                              action_ranges(state, params))
    c1 = ramp_penalty(requested, previous, up, down, np.asarray(pen.delta1), np.asarray(pen.delta2))
    c2 = heat_penalty(d.h_eb, d.h_mt, d.h_load, d.c_hsd_prev, params.effective_hsd.c_max,
                      pen.beta_lr, pen.beta_el)
    return c1, c2


__all__ = [
    'action_ranges', 'normalize_action', 'decode_action', 'dispatch', 'revenue_and_cost',
    'ramp_penalty', 'heat_penalty', 'penalties',
]
