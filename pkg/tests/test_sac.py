"""Replay, schedule, SAC losses and the training loop."""
import math

import numpy as np
import pytest

from iesguard.attack import Adversary, AdversaryBudget
from iesguard.bounds import MixSchedule, sa_regularizer
from iesguard.environment import IesEnv, SystemParams
from iesguard.exceptions import DimensionMismatchError, EmptyBufferError, NonFiniteLossError, ValidationError
from iesguard.harness.profiles import generate_profiles
from iesguard.nn import MlpParams, mean_head, predict
from iesguard.sac import (
    CURVE_COLUMNS, Batch, EpsilonSchedule, ReplayBuffer, SacAgent, Trainer, TrainerConfig, Transition, actor_loss,
    critic_loss, evaluate, phase_lengths, soft_q_target, temperature_loss, train,
)
from iesguard.sac.agent import _check_finite
from iesguard.signals import SIGNAL_SUPPORT, episode_completed, phase_changed


def _transition(i, obs_dim=9, act_dim=6, reward=None):
    return Transition(np.full(obs_dim, i / 100.0), np.full(act_dim, 0.1), float(i if reward is None else reward),
                      np.full(obs_dim, (i + 1) / 100.0), False)


def _batch(rng, n=5, obs_dim=3, act_dim=2):
    return Batch(rng.uniform(-1, 1, (n, obs_dim)), rng.uniform(-1, 1, (n, act_dim)), rng.normal(size=n),
                 rng.uniform(-1, 1, (n, obs_dim)), np.zeros(n, dtype=bool))


def _small_nets(rng, obs_dim=3, act_dim=2, hidden=8):
    actor = MlpParams.init((obs_dim, hidden, 2 * act_dim), rng)
    critic1 = MlpParams.init((obs_dim + act_dim, hidden, 1), rng)
    critic2 = MlpParams.init((obs_dim + act_dim, hidden, 1), rng)
    return actor, critic1, critic2


def _numeric(net, loss, h=1e-6):
    out = []
    arrays = net.arrays()
    for k, a in enumerate(arrays):
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            plus = [x.copy() for x in arrays]
            minus = [x.copy() for x in arrays]
            plus[k][idx] += h
            minus[k][idx] -= h
            g[idx] = (loss(net.with_arrays(plus)) - loss(net.with_arrays(minus))) / (2 * h)
        out.append(g)
    return out


def _tiny_config(**kw):
    base = dict(episodes=3, batch_size=16, capacity=500, learning_starts=24, hidden=[16, 16])
    base.update(kw)
    return TrainerConfig(**base)


# ---------------------------------------------------------------------------
# Replay buffer
# ---------------------------------------------------------------------------

def test_buffer_evicts_oldest_first():
    buf = ReplayBuffer(3)
    for i in range(3):
        buf.push(_transition(i))
    assert len(buf) == 3
    assert buf.oldest().reward == 0.0
    buf.push(_transition(3))
    assert len(buf) == 3
    assert buf.oldest().reward == 1.0


def test_buffer_sampling(rng):
    buf = ReplayBuffer(10)
    with pytest.raises(EmptyBufferError):
        buf.sample(4, rng)
    for i in range(4):
        buf.push(_transition(i))
    batch = buf.sample(32, rng)
    assert len(batch) == 32
    assert set(batch.rewards.tolist()) <= {0.0, 1.0, 2.0, 3.0}
    assert batch.actions.shape == (32, 6)


def test_buffer_rejects_bad_transitions():
    buf = ReplayBuffer(4)
    with pytest.raises(DimensionMismatchError):
        buf.push(_transition(0, obs_dim=8))
    with pytest.raises(DimensionMismatchError):
        buf.push(_transition(0, act_dim=5))
    with pytest.raises(ValueError):
        buf.push(_transition(0, reward=float('nan')))
    with pytest.raises(ValueError):
        ReplayBuffer(0)


# ---------------------------------------------------------------------------
# Perturbation schedule
# ---------------------------------------------------------------------------

def test_phase_split():
    assert phase_lengths(1000) == (500, 300, 200)
    assert phase_lengths(300) == (150, 90, 60)
    assert sum(phase_lengths(7)) == 7
    with pytest.raises(ValueError):
        phase_lengths(0)


def test_schedule_values():
    sched = EpsilonSchedule(500, 300, 200, target_eps=0.1, kappa=1.0)
    assert sched.at(0) == MixSchedule(beta=1.0, epsilon=0.0, kappa=1.0)
    assert sched.at(499).epsilon == 0.0
    assert not sched.at(499).active
    assert sched.at(500).epsilon == pytest.approx(0.1 / 300)
    assert sched.at(500).beta == pytest.approx(1.0 - 1.0 / 300)
    assert sched.at(799).epsilon == pytest.approx(0.1)
    assert sched.at(799).beta == pytest.approx(0.0)
    assert sched.at(999) == MixSchedule(beta=0.0, epsilon=0.1, kappa=1.0)
    assert [sched.phase(e) for e in (0, 500, 800)] == ['warm', 'ramp', 'hold']


def test_schedule_is_monotone():
    sched = EpsilonSchedule(10, 6, 4, target_eps=0.2, kappa=1.0)
    eps = [sched.at(e).epsilon for e in range(20)]
    beta = [sched.at(e).beta for e in range(10, 20)]
    assert eps == sorted(eps)
    assert beta == sorted(beta, reverse=True)


def test_trainer_config_phases():
    assert TrainerConfig(episodes=300).phases == (150, 90, 60)
    assert TrainerConfig(episodes=10, warm_episodes=2, ramp_episodes=3, hold_episodes=5).phases == (2, 3, 5)
    with pytest.raises(ValidationError):
        TrainerConfig(episodes=10, warm_episodes=2)
    with pytest.raises(ValidationError):
        TrainerConfig(episodes=10, warm_episodes=2, ramp_episodes=3, hold_episodes=4)
    with pytest.raises(ValidationError):
        TrainerConfig(algorithm='ppo')
    assert TrainerConfig(algorithm='sac', kappa=3.0).schedule().kappa == 0.0


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def test_critic_loss_zero_at_target(rng):
    _, critic, _ = _small_nets(rng)
    batch = _batch(rng)
    q = predict(critic, np.concatenate([batch.obs, batch.actions], axis=1))[:, 0]
    loss, grads = critic_loss(critic, batch.obs, batch.actions, q)
    assert loss == pytest.approx(0.0)
    assert all(np.allclose(g, 0.0) for g in grads)


def test_critic_loss_gradient(rng):
    _, critic, _ = _small_nets(rng)
    batch = _batch(rng)
    y = rng.normal(size=5)
    _, grads = critic_loss(critic, batch.obs, batch.actions, y)
    numeric = _numeric(critic, lambda net: critic_loss(net, batch.obs, batch.actions, y)[0])
    for a, n in zip(grads, numeric):
        assert a == pytest.approx(n, rel=1e-3, abs=1e-7)


def test_soft_target_without_discount_is_reward(rng):
    actor, c1, c2 = _small_nets(rng)
    batch = _batch(rng)
    y = soft_q_target(actor, c1, c2, batch, 0.2, 0.0, rng.normal(size=(5, 2)))
    assert y == pytest.approx(batch.rewards)


def test_soft_target_ignores_next_state_when_done(rng):
    actor, c1, c2 = _small_nets(rng)
    batch = _batch(rng)._replace(dones=np.ones(5, dtype=bool))
    y = soft_q_target(actor, c1, c2, batch, 0.2, 0.95, rng.normal(size=(5, 2)))
    assert y == pytest.approx(batch.rewards)


@pytest.mark.parametrize('sched', [None, MixSchedule(beta=0.5, epsilon=0.1, kappa=2.0)])
def test_actor_loss_gradient(rng, sched):
    actor, c1, c2 = _small_nets(rng)
    obs = rng.uniform(-1, 1, (4, 3))
    noise = rng.normal(size=(4, 2))
    _, grads, _, _ = actor_loss(actor, c1, c2, obs, 0.2, noise, sched)
    numeric = _numeric(actor, lambda net: actor_loss(net, c1, c2, obs, 0.2, noise, sched)[0])
    for a, n in zip(grads, numeric):
        assert a == pytest.approx(n, rel=1e-3, abs=1e-6)


def test_actor_loss_without_weight_is_plain(rng):
    actor, c1, c2 = _small_nets(rng)
    obs = rng.uniform(-1, 1, (4, 3))
    noise = rng.normal(size=(4, 2))
    plain, g_plain, _, _ = actor_loss(actor, c1, c2, obs, 0.2, noise)
    off, g_off, _, reg = actor_loss(actor, c1, c2, obs, 0.2, noise, MixSchedule(beta=0.5, epsilon=0.1, kappa=0.0))
    assert off == plain
    assert reg == 0.0
    assert all(np.array_equal(a, b) for a, b in zip(g_plain, g_off))


def test_actor_loss_adds_weighted_regularizer(rng):
    actor, c1, c2 = _small_nets(rng)
    obs = rng.uniform(-1, 1, (4, 3))
    noise = rng.normal(size=(4, 2))
    sched = MixSchedule(beta=0.3, epsilon=0.1, kappa=2.0)
    plain, _, _, _ = actor_loss(actor, c1, c2, obs, 0.2, noise)
    total, _, _, reg = actor_loss(actor, c1, c2, obs, 0.2, noise, sched)
    assert reg == pytest.approx(sa_regularizer(mean_head(actor), obs, 0.1, 0.3)[0])
    assert total == pytest.approx(plain + 2.0 * reg)


def test_temperature_loss_sign():
    # entropy below target: the gradient step raises alpha
    loss, grad = temperature_loss(math.log(0.2), np.full(8, 10.0), -6.0)
    assert grad < 0
    assert loss == pytest.approx(-0.2 * 4.0)
    # at the target the gradient vanishes
    assert temperature_loss(0.0, np.full(8, 6.0), -6.0) == (0.0, 0.0)


def test_non_finite_loss_raises():
    with pytest.raises(NonFiniteLossError):
        _check_finite('critic1', float('nan'))


def test_agent_temperature_update_moves_alpha(rng):
    agent = SacAgent.create(3, 2, (8,), rng, lr_alpha=1e-2, target_entropy=-2.0)
    before = agent.alpha
    agent.temperature_update(np.full(16, 5.0))
    assert agent.alpha > before
    agent.temperature_update(np.full(16, -50.0))
    agent.temperature_update(np.full(16, -50.0))
    assert agent.alpha < before * 1.05


def test_agent_update_changes_networks(rng):
    agent = SacAgent.create(3, 2, (8,), rng)
    actor, critic, target = agent.actor, agent.critic1, agent.target1
    stats = agent.update(_batch(rng), MixSchedule(beta=1.0, epsilon=0.05), rng)
    assert agent.actor.version == actor.version + 1
    assert agent.critic1.version == critic.version + 1
    assert not np.array_equal(agent.target1.weights[0], target.weights[0])
    assert stats.regularizer > 0.0
    assert np.all(np.abs(agent.act(np.zeros(3), rng)) < 1.0)


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------

def _env_factory(days=2):
    profiles = generate_profiles(days, seed=0)
    return lambda: IesEnv(profiles, SystemParams(), seed=0)


def test_train_smoke():
    result = train(_env_factory(), _tiny_config(), seed=5)
    assert result.curves.columns == list(CURVE_COLUMNS)
    assert result.curves.height == 3
    assert result.curves['eps'].to_list() == pytest.approx([0.0, 0.0, 0.1])
    assert result.checkpoint.meta['algorithm'] == 'sa-sac'
    assert result.checkpoint.policy.is_finite()
    assert np.all(np.isfinite(result.curves['reward'].to_numpy()))


def test_train_is_deterministic():
    a = train(_env_factory(), _tiny_config(), seed=9)
    b = train(_env_factory(), _tiny_config(), seed=9)
    assert a.curves.equals(b.curves)
    for x, y in zip(a.checkpoint.policy.arrays(), b.checkpoint.policy.arrays()):
        assert np.array_equal(x, y)


def test_different_seeds_differ():
    a = train(_env_factory(), _tiny_config(episodes=1), seed=1)
    b = train(_env_factory(), _tiny_config(episodes=1), seed=2)
    assert not np.array_equal(a.checkpoint.policy.weights[0], b.checkpoint.policy.weights[0])


@pytest.mark.skipif(not SIGNAL_SUPPORT, reason="blinker not installed")
def test_trainer_signals():
    rows, phases = [], []

    def on_episode(sender, row, **kwargs):
        rows.append(row['episode'])

    def on_phase(sender, phase, episode, **kwargs):
        phases.append((phase, episode))

    episode_completed.connect(on_episode)
    phase_changed.connect(on_phase)
    try:
        Trainer(_env_factory()(), _tiny_config(), seed=0).run()
    finally:
        episode_completed.disconnect(on_episode)
        phase_changed.disconnect(on_phase)
    assert rows == [0, 1, 2]
    assert phases == [('warm', 0), ('ramp', 2)]


def test_evaluate_is_deterministic(rng):
    policy = MlpParams.init((9, 16, 12), rng)
    env = _env_factory(days=3)()
    first = evaluate(policy, env, 4, seed=3, label='clean')
    second = evaluate(policy, env, 4, seed=3, label='clean')
    assert first.summary == second.summary
    assert first.episodes['day'].to_list() == [0, 1, 2, 0]
    assert first.traces.height == 4 * 24
    assert first.summary['profit'] == pytest.approx(first.summary['revenue'] - first.summary['cost'])


def test_evaluate_restores_adversary(rng):
    policy = MlpParams.init((9, 16, 12), rng)
    env = _env_factory()()
    evaluate(policy, env, 1, adversary=Adversary('itdsa'), seed=0)
    assert env.adversary is None
    with pytest.raises(ValueError):
        evaluate(policy, env, 0)


# ---------------------------------------------------------------------------
# Acceptance experiments
# ---------------------------------------------------------------------------

ACCEPTANCE_SEEDS = (0, 1, 2, 3, 4)


def _acceptance_run(algorithm, scenario, seed, attacked):
    profiles = generate_profiles(7, seed=0)
    params = SystemParams().for_scenario(scenario)
    cfg = TrainerConfig(algorithm=algorithm, episodes=300)
    result = train(lambda: IesEnv(profiles, params, seed=seed), cfg, seed)
    env = IesEnv(profiles, params, seed=seed)
    clean = evaluate(result.checkpoint.policy, env, 7, seed=seed).summary
    out = {'clean': clean['profit'], 'curves': result.curves}
    if attacked:
        adversary = Adversary('itdsa', AdversaryBudget(), params.itdsa, params.building,
                              result.checkpoint.policy, seed=seed)
        out['attacked'] = evaluate(result.checkpoint.policy, env, 7, adversary, seed=seed).summary['profit']
    return out


def _drop(run):
    return (run['clean'] - run['attacked']) / abs(run['clean'])


@pytest.mark.slow
def test_robust_training_loses_less_under_attack():
    sac = [_drop(_acceptance_run('sac', 1, s, True)) for s in ACCEPTANCE_SEEDS]
    robust = [_drop(_acceptance_run('sa-sac', 1, s, True)) for s in ACCEPTANCE_SEEDS]
    assert np.mean(robust) < np.mean(sac)


@pytest.mark.slow
def test_scenario_profit_ordering():
    profits = {k: [_acceptance_run('sac', k, s, False)['clean'] for s in ACCEPTANCE_SEEDS] for k in (1, 2, 3, 4)}
    mean = {k: np.mean(v) for k, v in profits.items()}
    sem = {k: np.std(v, ddof=1) / math.sqrt(len(v)) for k, v in profits.items()}
    assert mean[1] >= mean[2] - sem[2]
    assert mean[1] >= mean[3] - sem[3]
    assert mean[3] >= mean[4] - sem[4]


@pytest.mark.slow
def test_plain_sac_learns():
    gains = []
    for s in ACCEPTANCE_SEEDS:
        rewards = _acceptance_run('sac', 1, s, False)['curves']['reward'].to_numpy()
        first, last = rewards[:20].mean(), rewards[-20:].mean()
        gains.append((first, last))
    first = np.mean([g[0] for g in gains])
    last = np.mean([g[1] for g in gains])
    assert last - first >= 0.5 * abs(first)
