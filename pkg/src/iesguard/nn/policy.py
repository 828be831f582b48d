"""
Tanh-squashed Gaussian policy head.

The actor is a single MLP whose output is split in half: the first
``action_dim`` outputs are the mean ``mu`` and the rest the log standard
deviation, clipped to ``[LOG_STD_MIN, LOG_STD_MAX]``. Actions are sampled by
reparameterization ``u = mu + sigma * eps`` and squashed with ``tanh``; the
log density includes the change-of-variables correction.
"""
import math
from typing import NamedTuple, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError
from .mlp import MlpCache, MlpGrads, MlpParams, backward, forward

LOG_STD_MIN, LOG_STD_MAX = -20.0, 2.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG2 = math.log(2.0)


class PolicySample(NamedTuple):
    """Everything a reparameterized sample needs for its gradient."""
    action: np.ndarray
    log_prob: np.ndarray
    mu: np.ndarray
    log_std: np.ndarray
    std_active: np.ndarray
    noise: np.ndarray
    pre_tanh: np.ndarray
    cache: MlpCache


def action_dim(policy: MlpParams) -> int:
    if policy.out_dim % 2:
        raise DimensionMismatchError(f"policy output width must be even, got {policy.out_dim}")
    return policy.out_dim // 2


def mean_head(policy: MlpParams) -> MlpParams:
    """The sub-network producing ``mu`` (bounded by the regularizer)."""
    return policy.slice_outputs(action_dim(policy))


def squash_log_correction(u: np.ndarray) -> np.ndarray:
    """``log(1 - tanh(u)^2)`` computed as ``2(log 2 - u - softplus(-2u))``."""
    return 2.0 * (_LOG2 - u - np.logaddexp(0.0, -2.0 * u))


def sample_action(policy: MlpParams, obs: np.ndarray, noise: np.ndarray) -> PolicySample:
    """Reparameterized tanh-Gaussian sample.

    Args:
        policy: Actor network with ``2 * action_dim`` outputs
        obs: Normalized observation ``(obs_dim,)`` or batch ``(batch, obs_dim)``
        noise: Standard-normal draws shaped like the action

    Returns:
        PolicySample; ``action`` lies in (-1, 1) and ``log_prob`` has one entry
        per row (a scalar array for a single observation)
    """
    dim = action_dim(policy)
    y, cache = forward(policy, obs)
    y2 = np.atleast_2d(y)
    eps = np.asarray(noise, dtype=np.float64).reshape(y2.shape[0], dim)

    mu = y2[:, :dim]
    raw_log_std = y2[:, dim:]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    active = (raw_log_std >= LOG_STD_MIN) & (raw_log_std <= LOG_STD_MAX)
    u = mu + np.exp(log_std) * eps
    a = np.tanh(u)

    gauss = -0.5 * eps ** 2 - log_std - _HALF_LOG_2PI
    log_prob = gauss.sum(axis=1) - squash_log_correction(u).sum(axis=1)

    if cache.squeeze:
        return PolicySample(a[0], log_prob[0], mu[0], log_std[0], active[0], eps[0], u[0], cache)
    return PolicySample(a, log_prob, mu, log_std, active, eps, u, cache)


def deterministic_action(policy: MlpParams, obs: np.ndarray) -> np.ndarray:
    """Evaluation action ``tanh(mu)``."""
    dim = action_dim(policy)
    y, _ = forward(policy, obs)
    return np.tanh(y[..., :dim])


def policy_backward(policy: MlpParams, sample: PolicySample, grad_action: np.ndarray,
                    grad_log_prob: np.ndarray) -> MlpGrads:
    """Parameter gradients of ``L`` given ``dL/da`` and ``dL/dlog_pi`` per row.

    Noise is held fixed (reparameterization). With ``a = tanh(u)``:
    ``dL/du = dL/da * (1 - a^2) + dL/dlog_pi * 2a``, ``dL/dmu = dL/du`` and
    ``dL/dlog_std = dL/du * sigma * eps - dL/dlog_pi`` where the clip is inactive.
    """
    a = np.atleast_2d(sample.action)
    eps = np.atleast_2d(sample.noise)
    log_std = np.atleast_2d(sample.log_std)
    active = np.atleast_2d(sample.std_active)
    g_a = np.asarray(grad_action, dtype=np.float64).reshape(a.shape)
    g_lp = np.asarray(grad_log_prob, dtype=np.float64).reshape(a.shape[0], 1)

    g_u = g_a * (1.0 - a ** 2) + g_lp * 2.0 * a
    g_log_std = (g_u * np.exp(log_std) * eps - g_lp) * active
    dy = np.concatenate([g_u, g_log_std], axis=1)
    if sample.cache.squeeze:
        dy = dy[0]
    return backward(policy, sample.cache, dy)


def gaussian_entropy_estimate(log_probs: np.ndarray) -> float:
    """Monte-Carlo entropy ``-E[log pi]``."""
    return float(-np.mean(log_probs))


__all__ = [
    'PolicySample', 'LOG_STD_MIN', 'LOG_STD_MAX', 'action_dim', 'mean_head', 'squash_log_correction',
    'sample_action', 'deterministic_action', 'policy_backward', 'gaussian_entropy_estimate',
]
