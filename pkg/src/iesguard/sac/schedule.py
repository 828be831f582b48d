"""
Perturbation schedule of the actor regularizer.

Training runs in three phases: ``warm`` (no regularizer, plain SAC), ``ramp``
(ε grows linearly to its target while the CROWN weight β falls from 1 to 0)
and ``hold`` (ε at target, pure IBP bounds).
"""
from typing import NamedTuple, Tuple

from ..bounds import MixSchedule

WARM, RAMP, HOLD = 'warm', 'ramp', 'hold'
PHASE_FRACTIONS = (0.5, 0.3, 0.2)


def phase_lengths(episodes: int) -> Tuple[int, int, int]:
    """Split ``episodes`` 50/30/20 into (warm, ramp, hold); rounding goes to hold."""
    if episodes <= 0:
        raise ValueError(f"episodes must be positive, got {episodes}")
    warm = int(round(episodes * PHASE_FRACTIONS[0]))
    ramp = int(round(episodes * PHASE_FRACTIONS[1]))
    return warm, ramp, episodes - warm - ramp


class EpsilonSchedule(NamedTuple):
    warm: int
    ramp: int
    hold: int
    target_eps: float
    kappa: float

    @property
    def episodes(self) -> int:
        return self.warm + self.ramp + self.hold

    def phase(self, episode: int) -> str:
        if episode < self.warm:
            return WARM
        if episode < self.warm + self.ramp:
            return RAMP
        return HOLD

    def progress(self, episode: int) -> float:
        """Ramp completion in [0, 1]; reaches 1 on the last ramp episode."""
        if episode < self.warm:
            return 0.0
        if self.ramp == 0 or episode >= self.warm + self.ramp:
            return 1.0
        return (episode - self.warm + 1) / self.ramp

    def at(self, episode: int) -> MixSchedule:
        """Regularizer setting for a 0-based episode index."""
        if episode < 0:
            raise ValueError(f"episode must be >= 0, got {episode}")
        if self.phase(episode) == WARM:
            return MixSchedule(beta=1.0, epsilon=0.0, kappa=self.kappa)
        p = self.progress(episode)
        return MixSchedule(beta=1.0 - p, epsilon=self.target_eps * p, kappa=self.kappa)


__all__ = ['WARM', 'RAMP', 'HOLD', 'PHASE_FRACTIONS', 'phase_lengths', 'EpsilonSchedule']
