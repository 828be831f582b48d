"""Gymnasium surface over the pure episode engine."""
from typing import Any, Dict, List, Optional, Sequence, Tuple

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from ..exceptions import ValidationError
from .core import ObservationScaler, observe, reset, step
from .state import ACTION_DIM, OBS_DIM, DayProfile, EnvState, SystemParams


class IesEnv(gym.Env):
    """One 24-step scheduling day per episode.

    Days are taken from ``profiles`` in order (cycling), unless
    ``options={'day': k}`` picks one. The adversary, when set, perturbs
    observations only.

    Attributes:
        profiles: Day profiles the episodes are drawn from
        params: System parameters (scenario already applied)
        scaler: Observation normalizer, fitted on ``profiles`` by default
        adversary: Optional observation adversary
    """

    metadata = {'render_modes': []}

    def __init__(self, profiles: Sequence[DayProfile], params: Optional[SystemParams] = None,
                 scaler: Optional[ObservationScaler] = None, adversary: Any = None,
                 seed: Optional[int] = None) -> None:
        super().__init__()
        if not profiles:
            raise ValidationError("IesEnv needs at least one day profile")
        self.profiles: List[DayProfile] = list(profiles)
        self.params = params or SystemParams()
        self.scaler = scaler or ObservationScaler.fit(self.profiles)
        self.adversary = adversary
        self.observation_space = spaces.Box(-1.0, 1.0, shape=(OBS_DIM,), dtype=np.float64)
        self.action_space = spaces.Box(-1.0, 1.0, shape=(ACTION_DIM,), dtype=np.float64)
        self.state: Optional[EnvState] = None
        self._next_day = 0
        self._rng = np.random.default_rng(seed)

    def reset(self, *, seed: Optional[int] = None,
              options: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, Dict[str, Any]]:
        super().reset(seed=seed)
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        day = (options or {}).get('day')
        if day is None:
            day = self._next_day
            self._next_day = (self._next_day + 1) % len(self.profiles)
        profile = self.profiles[int(day) % len(self.profiles)]
        self.state = reset(profile, self.params, self._rng)
        return observe(self.state, self.scaler, self.adversary), {'day': profile.day_index}

    def step(self, action: np.ndarray) -> Tuple[np.ndarray, float, bool, bool, Dict[str, Any]]:
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        result = step(self.state, action, self.params, self._rng, self.scaler, self.adversary)
        self.state = result.next_state
        return result.observation, result.reward, result.done, False, result.info


__all__ = ['IesEnv']
