from .state import (
    GridParams, PenaltyParams, SystemParams, DayProfile, Action, EnvState, DispatchResult,
    ACTION_NAMES, OBS_NAMES, ACTION_DIM, OBS_DIM, SCENARIOS,
)
from .dispatch import (
    decode_action, dispatch, revenue_and_cost, penalties, heat_penalty, ramp_penalty, normalize_action,
    action_ranges,
)
from .core import ObservationScaler, StepResult, reset, observe, step
from .gym_env import IesEnv

__all__ = [
    'GridParams', 'PenaltyParams', 'SystemParams', 'DayProfile', 'Action', 'EnvState', 'DispatchResult',
    'ACTION_NAMES', 'OBS_NAMES', 'ACTION_DIM', 'OBS_DIM', 'SCENARIOS',
    'decode_action', 'dispatch', 'revenue_and_cost', 'penalties', 'heat_penalty', 'ramp_penalty',
    'normalize_action', 'action_ranges',
    'ObservationScaler', 'StepResult', 'reset', 'observe', 'step', 'IesEnv',
]
