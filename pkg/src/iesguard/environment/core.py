"""
Episode engine: reset, observe and step.

The functions here are pure: they take a state and return a new one, with
all randomness drawn from the generator passed in. An adversary only
changes the observation returned to the caller; the state trajectory for a
fixed action sequence is the same with or without one.
"""
from dataclasses import dataclass, replace
from typing import Any, Dict, NamedTuple, Optional, Sequence

import numpy as np

from ..devices import (
    HOURS_PER_DAY, FlexLoadLedger, building_heat_demand, indoor_temp_from_heat, sample_patience, soc_of,
)
from ..exceptions import EpisodeDoneError, ValidationError
from ..logging import logger
from .dispatch import decode_action, dispatch, penalties, revenue_and_cost
from .state import OBS_DIM, DayProfile, EnvState, SystemParams, exogenous


@dataclass(frozen=True)
class ObservationScaler:
    """Per-component min-max normalization to [-1, 1].

    Constant components map to 0; values outside the fitted range are clipped.
    """
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self) -> None:
        low = np.asarray(self.low, dtype=np.float64).reshape(-1)
        high = np.asarray(self.high, dtype=np.float64).reshape(-1)
        if low.shape != (OBS_DIM,) or high.shape != (OBS_DIM,):
            raise ValidationError(f"scaler bounds need {OBS_DIM} components, got {low.shape} and {high.shape}")
        if np.any(low > high):
            raise ValidationError("scaler lower bounds exceed upper bounds")
        object.__setattr__(self, 'low', low)
        object.__setattr__(self, 'high', high)

    @classmethod
    def fit(cls, profiles: Sequence[DayProfile]) -> 'ObservationScaler':
        """Bounds from a profile set; SOC spans [0, 1] and the hour [0, 23]."""
        if not profiles:
            raise ValidationError("cannot fit an observation scaler without profiles")

        def span(values):
            values = np.concatenate([np.asarray(v, dtype=np.float64) for v in values])
            return values.min(), values.max()

        columns = [
            (0.0, 1.0),
            (0.0, 1.0),
            span([p.tou.elec for p in profiles]),
            span([p.tou.gas for p in profiles]),
            span([p.wt for p in profiles]),
            span([p.basic_e for p in profiles]),
            span([p.basic_g for p in profiles]),
            span([p.basic_h for p in profiles]),
            (0.0, float(HOURS_PER_DAY - 1)),
        ]
        return cls(np.array([c[0] for c in columns]), np.array([c[1] for c in columns]))

    def normalize(self, native: np.ndarray) -> np.ndarray:
        native = np.asarray(native, dtype=np.float64)
        width = self.high - self.low
        safe = np.where(width > 0, width, 1.0)
        scaled = np.where(width > 0, 2.0 * (native - self.low) / safe - 1.0, 0.0)
        return np.clip(scaled, -1.0, 1.0)

    def normalize_component(self, index: int, value: float) -> float:
        lo, hi = self.low[index], self.high[index]
        if hi <= lo:
            return 0.0
        return float(np.clip(2.0 * (value - lo) / (hi - lo) - 1.0, -1.0, 1.0))


class StepResult(NamedTuple):
    next_state: EnvState
    reward: float
    observation: np.ndarray
    done: bool
    info: Dict[str, Any]


def reset(profile: DayProfile, params: SystemParams, rng: np.random.Generator) -> EnvState:
    """Initial state of a day: storages at ``c0``, building at comfort, empty ledgers.

    Draws the electric then the gas patience factor from ``rng``.
    """
    flex = params.flex
    eta_e = sample_patience(rng, flex.eta_mean, flex.eta_std)
    eta_g = sample_patience(rng, flex.eta_mean, flex.eta_std)
    ledger_e = FlexLoadLedger('electric', profile.basic_e, flex.sigma_mean, eta_e, (), flex.gamma_tse)
    ledger_g = FlexLoadLedger('gas', profile.basic_g, flex.sigma_mean, eta_g, (), flex.gamma_tsq)

    esd, hsd = params.esd, params.effective_hsd
    t_in = params.building.t_comfort
    return EnvState(
        hour=0,
        c_esd=esd.initial, c_hsd=hsd.initial,
        soc_esd=soc_of(esd.initial, esd), soc_hsd=soc_of(hsd.initial, hsd),
        t_in_prev=t_in, ledger_e=ledger_e, ledger_g=ledger_g, profile=profile, prev_action=None,
        **exogenous(profile, 0, t_in, params),
    )


def observe(state: EnvState, scaler: ObservationScaler, adversary: Optional[Any] = None) -> np.ndarray:
    """Normalized observation of ``state``, perturbed by ``adversary`` if given."""
    obs = scaler.normalize(state.native_observation())
    if adversary is None:
        return obs
    return adversary.perturb(obs, state, scaler)


def step(state: EnvState, raw_action: np.ndarray, params: SystemParams, rng: np.random.Generator,
         scaler: ObservationScaler, adversary: Optional[Any] = None) -> StepResult:
    """Advance one hour.

    ``reward = (rev − cost) − (c1 + c2)``. ``info`` carries the decoded
    action, the dispatch record and the accounting terms.

    Raises:
        EpisodeDoneError: If the episode already reached hour 24
    """
    if state.done:
        raise EpisodeDoneError(f"episode finished at hour {state.hour}; call reset()")

    action = decode_action(raw_action, state, params)
    d = dispatch(state, action, params, rng)
    rev, cost = revenue_and_cost(d, params)
    c1, c2 = penalties(state, action, d, params)
    profit = rev - cost
    reward = profit - (c1 + c2)

    b = params.building
    delivered = building_heat_demand(b.t_comfort, state.t_in_prev, state.t_out, b) - d.h_cut
    t_in_next = indoor_temp_from_heat(delivered, state.t_in_prev, state.t_out, b)

    hour = state.hour + 1
    esd, hsd = params.esd, params.effective_hsd
    next_state = replace(
        state,
        hour=hour,
        c_esd=d.c_esd_next, c_hsd=d.c_hsd_next,
        soc_esd=soc_of(d.c_esd_next, esd), soc_hsd=soc_of(d.c_hsd_next, hsd),
        t_in_prev=t_in_next,
        ledger_e=d.ledger_e, ledger_g=d.ledger_g,
        prev_action=action,
        **exogenous(state.profile, hour, t_in_next, params),
    )
    if any(d.flags.values()):
        logger.debug(f"hour {state.hour} flags: {sorted(k for k, v in d.flags.items() if v)}")

    info = {
        'action': action, 'dispatch': d, 'revenue': rev, 'cost': cost, 'profit': profit,
        'c1': c1, 'c2': c2, 't_in': t_in_next,
    }
    observation = observe(next_state, scaler, adversary)
    return StepResult(next_state, reward, observation, next_state.done, info)


__all__ = ['ObservationScaler', 'StepResult', 'reset', 'observe', 'step']
