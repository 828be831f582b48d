"""Soft actor-critic with the certified-bound actor regularizer."""
from .buffer import Transition, Batch, ReplayBuffer
from .schedule import EpsilonSchedule, phase_lengths, WARM, RAMP, HOLD
from .agent import SacAgent, UpdateStats, soft_q_target, critic_loss, actor_loss, temperature_loss
from .trainer import (
    TrainerConfig, Trainer, TrainingResult, EvaluationResult, CURVE_COLUMNS, ALGORITHMS, train, evaluate,
)

__all__ = [
    'Transition', 'Batch', 'ReplayBuffer',
    'EpsilonSchedule', 'phase_lengths', 'WARM', 'RAMP', 'HOLD',
    'SacAgent', 'UpdateStats', 'soft_q_target', 'critic_loss', 'actor_loss', 'temperature_loss',
    'TrainerConfig', 'Trainer', 'TrainingResult', 'EvaluationResult', 'CURVE_COLUMNS', 'ALGORITHMS',
    'train', 'evaluate',
]
