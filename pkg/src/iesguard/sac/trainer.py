"""
Training and evaluation loops.

``train`` runs the episode loop: one environment step, one replay push and
(after ``learning_starts`` transitions) one gradient step per hour. The
actor regularizer follows the warm/ramp/hold schedule of
:mod:`iesguard.sac.schedule`; with ``algorithm='sac'`` its weight is zero
and the run is plain SAC. Critics always learn from clean observations.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import polars as pl

from ..environment.gym_env import IesEnv
from ..environment.state import ACTION_DIM, OBS_DIM
from ..exceptions import ValidationError
from ..fields import FloatField, IntField, ListField, StringField
from ..logging import logger
from ..nn.checkpoint import Checkpoint
from ..nn.mlp import MlpParams
from ..nn.policy import deterministic_action
from ..params import ParamSet
from ..signals import (
    SIGNAL_SUPPORT, episode_completed, evaluation_completed, gradient_step_completed, phase_changed,
    training_finished, training_started,
)
from ..utils.rng import spawn_generators, spawn_seeds
from .agent import SacAgent
from .buffer import ReplayBuffer, Transition
from .schedule import EpsilonSchedule, phase_lengths

log = logger.child('trainer')

CURVE_COLUMNS = ('episode', 'reward', 'profit', 'c1', 'c2', 'alpha', 'eps', 'beta')
ALGORITHMS = ('sac', 'sa-sac')


class TrainerConfig(ParamSet):
    """Hyper-parameters of one training run.

    The phase lengths default to a 50/30/20 split of ``episodes``; when any
    of them is given all three must be, and they must add up to ``episodes``.
    """
    algorithm = StringField(default='sa-sac', choices=list(ALGORITHMS))
    episodes = IntField(min_value=1, default=1000)
    warm_episodes = IntField(min_value=0, default=None)
    ramp_episodes = IntField(min_value=0, default=None)
    hold_episodes = IntField(min_value=0, default=None)
    lr_actor = FloatField(min_value=0, default=5e-4)
    lr_critic = FloatField(min_value=0, default=2e-3)
    lr_alpha = FloatField(min_value=0, default=5e-4)
    gamma = FloatField(min_value=0, max_value=1, min_exclusive=True, max_exclusive=True, default=0.95)
    tau = FloatField(min_value=0, max_value=1, min_exclusive=True, default=0.005)
    batch_size = IntField(min_value=1, default=256)
    capacity = IntField(min_value=1, default=100_000)
    learning_starts = IntField(min_value=1, default=1000)
    kappa = FloatField(min_value=0, default=1.0)
    target_eps = FloatField(min_value=0, default=0.1)
    target_entropy = FloatField(default=-6.0)
    init_alpha = FloatField(min_value=0, min_exclusive=True, default=0.2)
    hidden = ListField(IntField(min_value=1), min_length=1, default=(128, 128))
    reward_scale = FloatField(min_value=0, min_exclusive=True, default=0.01)

    def clean(self) -> None:
        given = [self.warm_episodes, self.ramp_episodes, self.hold_episodes]
        if any(v is not None for v in given):
            if any(v is None for v in given):
                raise ValueError("warm_episodes, ramp_episodes and hold_episodes must be set together")
            if sum(given) != self.episodes:
                raise ValueError(f"phase lengths {given} do not add up to {self.episodes} episodes")

    @property
    def phases(self) -> Tuple[int, int, int]:
        if self.warm_episodes is None:
            return phase_lengths(self.episodes)
        return self.warm_episodes, self.ramp_episodes, self.hold_episodes

    @property
    def effective_kappa(self) -> float:
        return 0.0 if self.algorithm == 'sac' else self.kappa

    def schedule(self) -> EpsilonSchedule:
        warm, ramp, hold = self.phases
        return EpsilonSchedule(warm, ramp, hold, self.target_eps, self.effective_kappa)


@dataclass
class TrainingResult:
    checkpoint: Checkpoint
    curves: pl.DataFrame
    agent: SacAgent


@dataclass
class EvaluationResult:
    """Per-episode metrics and dispatch traces of a deterministic rollout."""
    episodes: pl.DataFrame
    traces: pl.DataFrame
    summary: Dict[str, float] = field(default_factory=dict)


def _empty_curves() -> pl.DataFrame:
    schema = {name: (pl.Int64 if name == 'episode' else pl.Float64) for name in CURVE_COLUMNS}
    return pl.DataFrame(schema=schema)


class Trainer:
    """One SAC / SA-SAC training run.

    Attributes:
        env: Training environment (clean observations)
        cfg: Trainer hyper-parameters
        seed: Root seed; fixes initialization, exploration, replay sampling and the environment
    """

    def __init__(self, env: IesEnv, cfg: TrainerConfig, seed: int) -> None:
        if env.observation_space.shape != (OBS_DIM,) or env.action_space.shape != (ACTION_DIM,):
            raise ValidationError("environment spaces do not match the agent's widths")
        self.env = env
        self.cfg = cfg
        self.seed = seed
        init_rng, self._policy_rng, self._replay_rng, self._update_rng = spawn_generators(seed, 4)
        self._env_seed = spawn_seeds(seed, 5)[4]
        self.agent = SacAgent.create(
            OBS_DIM, ACTION_DIM, cfg.hidden, init_rng,
            lr_actor=cfg.lr_actor, lr_critic=cfg.lr_critic, lr_alpha=cfg.lr_alpha,
            init_alpha=cfg.init_alpha, gamma=cfg.gamma, tau=cfg.tau, target_entropy=cfg.target_entropy,
        )
        self.buffer = ReplayBuffer(cfg.capacity)
        self.schedule = cfg.schedule()
        self.rows: List[Dict[str, Any]] = []

    def run_episode(self, episode: int) -> Dict[str, Any]:
        cfg, agent = self.cfg, self.agent
        sched = self.schedule.at(episode)
        obs, _ = self.env.reset(seed=self._env_seed if episode == 0 else None)
        reward = profit = c1 = c2 = 0.0
        done = False
        while not done:
            action = agent.act(obs, self._policy_rng)
            next_obs, r, done, _, info = self.env.step(action)
            self.buffer.push(Transition(obs, action, r * cfg.reward_scale, next_obs, done))
            reward += r
            profit += info['profit']
            c1 += info['c1']
            c2 += info['c2']
            if len(self.buffer) >= cfg.learning_starts:
                batch = self.buffer.sample(cfg.batch_size, self._replay_rng)
                stats = agent.update(batch, sched, self._update_rng)
                if SIGNAL_SUPPORT:
                    gradient_step_completed.send(Trainer, trainer=self, stats=stats)
            obs = next_obs

        return {
            'episode': episode, 'reward': reward, 'profit': profit, 'c1': c1, 'c2': c2,
            'alpha': agent.alpha, 'eps': sched.epsilon, 'beta': sched.beta,
        }

    def run(self) -> TrainingResult:
        cfg = self.cfg
        log.info(f"Training {cfg.algorithm} for {cfg.episodes} episodes (seed {self.seed}, "
                 f"phases {self.schedule.warm}/{self.schedule.ramp}/{self.schedule.hold})")
        if SIGNAL_SUPPORT:
            training_started.send(Trainer, trainer=self)

        phase = None
        for episode in range(cfg.episodes):
            current = self.schedule.phase(episode)
            if current != phase:
                log.info(f"Episode {episode}: entering {current} phase")
                if SIGNAL_SUPPORT:
                    phase_changed.send(Trainer, trainer=self, phase=current, episode=episode)
                phase = current
            row = self.run_episode(episode)
            self.rows.append(row)
            log.debug(f"episode {episode}: reward {row['reward']:.2f} profit {row['profit']:.2f} "
                      f"alpha {row['alpha']:.4f} eps {row['eps']:.4f}")
            if SIGNAL_SUPPORT:
                episode_completed.send(Trainer, trainer=self, row=row)

        curves = pl.DataFrame(self.rows, schema=_empty_curves().schema) if self.rows else _empty_curves()
        checkpoint = Checkpoint(
            policy=self.agent.actor,
            obs_low=self.env.scaler.low,
            obs_high=self.env.scaler.high,
            meta={'algorithm': cfg.algorithm, 'seed': self.seed, 'trainer': cfg.to_dict()},
        )
        log.info(f"Training finished: last episode reward {self.rows[-1]['reward']:.2f}")
        if SIGNAL_SUPPORT:
            training_finished.send(Trainer, trainer=self, checkpoint=checkpoint)
        return TrainingResult(checkpoint, curves, self.agent)


def train(env_factory: Callable[[], IesEnv], cfg: TrainerConfig, seed: int) -> TrainingResult:
    """Train a policy on a fresh environment from ``env_factory``."""
    return Trainer(env_factory(), cfg, seed).run()


def evaluate(policy: MlpParams, env: IesEnv, episodes: int, adversary: Any = None,
             seed: Optional[int] = None, label: str = '') -> EvaluationResult:
    """Roll out the deterministic policy ``tanh(mu)``.

    Days are visited in order, cycling through ``env.profiles``. The
    adversary, if any, replaces the environment's own for the duration of
    the call.
    """
    if episodes <= 0:
        raise ValueError(f"episodes must be positive, got {episodes}")
    saved = env.adversary
    env.adversary = adversary
    rows: List[Dict[str, Any]] = []
    traces: List[Dict[str, Any]] = []
    try:
        for episode in range(episodes):
            obs, meta = env.reset(seed=seed if episode == 0 else None,
                                  options={'day': episode % len(env.profiles)})
            totals = dict.fromkeys(('reward', 'profit', 'revenue', 'cost', 'c1', 'c2',
                                    'elec_cost', 'gas_cost'), 0.0)
            violations = 0
            done = False
            while not done:
                obs, r, done, _, info = env.step(deterministic_action(policy, obs))
                d = info['dispatch']
                totals['reward'] += r
                for key in ('profit', 'revenue', 'cost', 'c1', 'c2'):
                    totals[key] += info[key]
                totals['elec_cost'] += d.buy_e * d.p_buy
                totals['gas_cost'] += d.buy_g * d.q_buy
                violations += sum(1 for v in d.flags.values() if v)
                traces.append({'label': label, 'episode': episode, 'day': meta['day'], **d.to_row()})
            rows.append({'label': label, 'episode': episode, 'day': meta['day'], **totals,
                         'violations': violations})
    finally:
        env.adversary = saved

    frame = pl.DataFrame(rows)
    rewards = frame['reward'].to_numpy()
    summary = {
        'reward_mean': float(np.mean(rewards)),
        'reward_std': float(np.std(rewards)),
        'profit': float(frame['profit'].sum()),
        'revenue': float(frame['revenue'].sum()),
        'cost': float(frame['cost'].sum()),
        'c1': float(frame['c1'].sum()),
        'c2': float(frame['c2'].sum()),
        'elec_cost': float(frame['elec_cost'].sum()),
        'gas_cost': float(frame['gas_cost'].sum()),
        'violations': int(frame['violations'].sum()),
    }
    if not all(math.isfinite(v) for v in summary.values()):
        log.warning(f"non-finite evaluation summary for {label or 'run'}: {summary}")
    if SIGNAL_SUPPORT:
        evaluation_completed.send(evaluate, label=label, summary=summary)
    return EvaluationResult(frame, pl.DataFrame(traces), summary)


__all__ = [
    'TrainerConfig', 'Trainer', 'TrainingResult', 'EvaluationResult', 'CURVE_COLUMNS', 'ALGORITHMS',
    'train', 'evaluate',
]
