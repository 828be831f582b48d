"""
Soft actor-critic learner with twin critics and adaptive temperature.

The loss functions are pure: they take networks and a batch and return the
loss value together with parameter gradients, so they can be checked against
finite differences. :class:`SacAgent` owns the networks and optimizer states
and chains the losses into one gradient step.
"""
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..bounds import MixSchedule, sa_regularizer
from ..exceptions import NonFiniteLossError
from ..nn.mlp import MlpParams, backward, forward, predict, soft_update
from ..nn.optim import AdamState, adam_step, adam_update
from ..nn.policy import (
    PolicySample, action_dim, deterministic_action, mean_head, policy_backward, sample_action,
)
from .buffer import Batch


class UpdateStats(NamedTuple):
    critic1_loss: float
    critic2_loss: float
    actor_loss: float
    regularizer: float
    alpha_loss: float
    alpha: float
    entropy: float


def _critic_input(obs: np.ndarray, actions: np.ndarray) -> np.ndarray:
    return np.concatenate([np.atleast_2d(obs), np.atleast_2d(actions)], axis=1)


def soft_q_target(actor: MlpParams, target1: MlpParams, target2: MlpParams, batch: Batch,
                  alpha: float, gamma: float, noise: np.ndarray) -> np.ndarray:
    """``y = r + γ(1 − done)(min Q̄(s′, a′) − α log π(a′|s′))`` with ``a′`` sampled from the policy."""
    nxt = sample_action(actor, batch.next_obs, noise)
    x = _critic_input(batch.next_obs, nxt.action)
    q_next = np.minimum(predict(target1, x), predict(target2, x))[:, 0]
    soft_value = q_next - alpha * nxt.log_prob
    return batch.rewards + gamma * (1.0 - batch.dones.astype(np.float64)) * soft_value


def critic_loss(critic: MlpParams, obs: np.ndarray, actions: np.ndarray,
                targets: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    """Mean of ``½(Q(s, a) − y)²`` and its gradient."""
    q, cache = forward(critic, _critic_input(obs, actions))
    err = q[:, 0] - targets
    n = err.shape[0]
    loss = float(0.5 * np.mean(err ** 2))
    grads = backward(critic, cache, (err / n)[:, None])
    return loss, grads.arrays()


def _merge_head_grads(full: Sequence[np.ndarray], head: Sequence[np.ndarray], scale: float) -> List[np.ndarray]:
    merged = [g.copy() for g in full]
    for i, g in enumerate(head):
        rows = g.shape[0]
        merged[i][:rows] += scale * g
    return merged


def actor_loss(actor: MlpParams, critic1: MlpParams, critic2: MlpParams, obs: np.ndarray, alpha: float,
               noise: np.ndarray, sched: Optional[MixSchedule] = None
               ) -> Tuple[float, List[np.ndarray], PolicySample, float]:
    """``mean(α log π(a|s) − min Q(s, a)) + κ·regularizer`` and its actor gradient.

    Critic parameters are treated as constants. Returns the total loss, the
    gradients, the sample (for the temperature step) and the unweighted
    regularizer value.
    """
    obs = np.atleast_2d(obs)
    n = obs.shape[0]
    sample = sample_action(actor, obs, noise)
    x = _critic_input(obs, sample.action)
    q1, cache1 = forward(critic1, x)
    q2, cache2 = forward(critic2, x)
    first = q1[:, 0] <= q2[:, 0]
    min_q = np.where(first, q1[:, 0], q2[:, 0])
    loss = float(np.mean(alpha * sample.log_prob - min_q))

    obs_dim = obs.shape[1]
    dx1 = backward(critic1, cache1, np.where(first, -1.0 / n, 0.0)[:, None]).dx
    dx2 = backward(critic2, cache2, np.where(first, 0.0, -1.0 / n)[:, None]).dx
    g_action = dx1[:, obs_dim:] + dx2[:, obs_dim:]
    g_log_prob = np.full(n, alpha / n)
    grads = policy_backward(actor, sample, g_action, g_log_prob).arrays()

    reg = 0.0
    if sched is not None and sched.active:
        reg, reg_grads = sa_regularizer(mean_head(actor), obs, sched.epsilon, sched.beta)
        loss += sched.kappa * reg
        grads = _merge_head_grads(grads, reg_grads, sched.kappa)
    return loss, grads, sample, reg


def temperature_loss(log_alpha: float, log_probs: np.ndarray, target_entropy: float) -> Tuple[float, float]:
    """``J(α) = E[−α(log π + H₀)]`` and its derivative with respect to ``log α``."""
    alpha = math.exp(log_alpha)
    gap = float(np.mean(log_probs)) + target_entropy
    return -alpha * gap, -alpha * gap


def _check_finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise NonFiniteLossError(name, value)
    return value


class SacAgent:
    """Actor, twin critics, their targets and the temperature.

    Attributes:
        actor: Tanh-Gaussian policy network (``2 * action_dim`` outputs)
        critic1, critic2: Online Q networks over ``[obs, action]``
        target1, target2: Polyak-averaged copies of the critics
        log_alpha: Log of the entropy temperature
        gamma: Discount factor
        tau: Soft-update rate
        target_entropy: Entropy target ``H₀``
    """

    def __init__(self, actor: MlpParams, critic1: MlpParams, critic2: MlpParams, log_alpha: float,
                 lr_actor: float, lr_critic: float, lr_alpha: float, gamma: float, tau: float,
                 target_entropy: float) -> None:
        self.actor = actor
        self.critic1 = critic1
        self.critic2 = critic2
        self.target1 = critic1
        self.target2 = critic2
        self.log_alpha = float(log_alpha)
        self.gamma = gamma
        self.tau = tau
        self.target_entropy = target_entropy
        self.actor_opt = AdamState.for_net(actor, lr_actor)
        self.critic1_opt = AdamState.for_net(critic1, lr_critic)
        self.critic2_opt = AdamState.for_net(critic2, lr_critic)
        self.alpha_opt = AdamState.zeros_like([np.zeros(1)], lr_alpha)

    @classmethod
    def create(cls, obs_dim: int, act_dim: int, hidden: Sequence[int], rng: np.random.Generator, *,
               lr_actor: float = 5e-4, lr_critic: float = 2e-3, lr_alpha: float = 5e-4,
               init_alpha: float = 0.2, gamma: float = 0.95, tau: float = 0.005,
               target_entropy: float = -6.0) -> 'SacAgent':
        """Fresh networks; initialization draws actor, critic 1, critic 2 in that order."""
        hidden = tuple(hidden)
        actor = MlpParams.init((obs_dim,) + hidden + (2 * act_dim,), rng)
        critic1 = MlpParams.init((obs_dim + act_dim,) + hidden + (1,), rng)
        critic2 = MlpParams.init((obs_dim + act_dim,) + hidden + (1,), rng)
        return cls(actor, critic1, critic2, math.log(init_alpha), lr_actor, lr_critic, lr_alpha,
                   gamma, tau, target_entropy)

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    @property
    def action_dim(self) -> int:
        return action_dim(self.actor)

    def act(self, obs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Stochastic action in (-1, 1) for one observation."""
        noise = rng.standard_normal(self.action_dim)
        return sample_action(self.actor, obs, noise).action

    def act_deterministic(self, obs: np.ndarray) -> np.ndarray:
        return deterministic_action(self.actor, obs)

    def critic_update(self, batch: Batch, rng: np.random.Generator) -> Tuple[float, float]:
        noise = rng.standard_normal((len(batch), self.action_dim))
        y = soft_q_target(self.actor, self.target1, self.target2, batch, self.alpha, self.gamma, noise)
        loss1, grads1 = critic_loss(self.critic1, batch.obs, batch.actions, y)
        loss2, grads2 = critic_loss(self.critic2, batch.obs, batch.actions, y)
        _check_finite('critic1', loss1)
        _check_finite('critic2', loss2)
        self.critic1, self.critic1_opt = adam_step(self.critic1, grads1, self.critic1_opt)
        self.critic2, self.critic2_opt = adam_step(self.critic2, grads2, self.critic2_opt)
        return loss1, loss2

    def actor_update(self, batch: Batch, sched: Optional[MixSchedule],
                     rng: np.random.Generator) -> Tuple[float, float, np.ndarray]:
        noise = rng.standard_normal((len(batch), self.action_dim))
        loss, grads, sample, reg = actor_loss(self.actor, self.critic1, self.critic2, batch.obs,
                                              self.alpha, noise, sched)
        _check_finite('actor', loss)
        self.actor, self.actor_opt = adam_step(self.actor, grads, self.actor_opt)
        return loss, reg, sample.log_prob

    def temperature_update(self, log_probs: np.ndarray) -> Tuple[float, float]:
        loss, grad = temperature_loss(self.log_alpha, log_probs, self.target_entropy)
        _check_finite('alpha', loss)
        (new,), self.alpha_opt = adam_update([np.array([self.log_alpha])], [np.array([grad])], self.alpha_opt)
        self.log_alpha = float(new[0])
        return loss, self.alpha

    def update_targets(self) -> None:
        self.target1 = soft_update(self.target1, self.critic1, self.tau)
        self.target2 = soft_update(self.target2, self.critic2, self.tau)

    def update(self, batch: Batch, sched: Optional[MixSchedule], rng: np.random.Generator) -> UpdateStats:
        """One gradient step: critics, actor, temperature, then targets."""
        c1, c2 = self.critic_update(batch, rng)
        a_loss, reg, log_probs = self.actor_update(batch, sched, rng)
        t_loss, alpha = self.temperature_update(log_probs)
        self.update_targets()
        return UpdateStats(c1, c2, a_loss, reg, t_loss, alpha, float(-np.mean(log_probs)))


__all__ = [
    'UpdateStats', 'SacAgent', 'soft_q_target', 'critic_loss', 'actor_loss', 'temperature_loss',
]
