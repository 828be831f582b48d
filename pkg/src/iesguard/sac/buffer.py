"""Uniform replay memory."""
from typing import NamedTuple

import numpy as np

from ..environment.state import ACTION_DIM, OBS_DIM
from ..exceptions import DimensionMismatchError, EmptyBufferError


class Transition(NamedTuple):
    obs: np.ndarray
    raw_action: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool


class Batch(NamedTuple):
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return self.obs.shape[0]


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest transition is evicted first.

    Attributes:
        capacity: Maximum number of stored transitions
    """

    def __init__(self, capacity: int, obs_dim: int = OBS_DIM, action_dim: int = ACTION_DIM) -> None:
        if capacity <= 0:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self._obs = np.zeros((capacity, obs_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_dim))
        self._dones = np.zeros(capacity, dtype=bool)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, t: Transition) -> None:
        """Store one transition.

        Raises:
            DimensionMismatchError: If a vector has the wrong width
            ValueError: If the reward is not finite
        """
        obs = np.asarray(t.obs, dtype=np.float64)
        action = np.asarray(t.raw_action, dtype=np.float64)
        next_obs = np.asarray(t.next_obs, dtype=np.float64)
        if obs.shape != self._obs.shape[1:] or next_obs.shape != self._obs.shape[1:]:
            raise DimensionMismatchError(f"observation width {obs.shape} does not match {self._obs.shape[1:]}")
        if action.shape != self._actions.shape[1:]:
            raise DimensionMismatchError(f"action width {action.shape} does not match {self._actions.shape[1:]}")
        if not np.isfinite(t.reward):
            raise ValueError(f"reward must be finite, got {t.reward!r}")

        i = self._cursor
        self._obs[i] = obs
        self._actions[i] = action
        self._rewards[i] = t.reward
        self._next_obs[i] = next_obs
        self._dones[i] = bool(t.done)
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Draw ``batch_size`` transitions uniformly with replacement.

        Raises:
            EmptyBufferError: If nothing has been stored yet
        """
        if self._size == 0:
            raise EmptyBufferError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        return Batch(self._obs[idx], self._actions[idx], self._rewards[idx], self._next_obs[idx],
                     self._dones[idx])

    def oldest(self) -> Transition:
        """The transition that the next push would evict (or the first one stored)."""
        if self._size == 0:
            raise EmptyBufferError("replay buffer is empty")
        i = self._cursor if self._size == self.capacity else 0
        return Transition(self._obs[i].copy(), self._actions[i].copy(), float(self._rewards[i]),
                          self._next_obs[i].copy(), bool(self._dones[i]))


__all__ = ['Transition', 'Batch', 'ReplayBuffer']
