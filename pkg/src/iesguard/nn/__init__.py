"""Minimal dense-network substrate: ReLU MLPs, tanh-Gaussian policy, Adam and checkpoints."""
from .mlp import MlpParams, MlpCache, MlpGrads, forward, predict, backward, soft_update
from .policy import (
    PolicySample, LOG_STD_MIN, LOG_STD_MAX, action_dim, mean_head, sample_action,
    deterministic_action, policy_backward,
)
from .optim import AdamState, adam_update, adam_step
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint, dumps_checkpoint, loads_checkpoint

__all__ = [
    'MlpParams', 'MlpCache', 'MlpGrads', 'forward', 'predict', 'backward', 'soft_update',
    'PolicySample', 'LOG_STD_MIN', 'LOG_STD_MAX', 'action_dim', 'mean_head', 'sample_action',
    'deterministic_action', 'policy_backward',
    'AdamState', 'adam_update', 'adam_step',
    'Checkpoint', 'save_checkpoint', 'load_checkpoint', 'dumps_checkpoint', 'loads_checkpoint',
]
