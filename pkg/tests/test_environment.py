"""Episode engine, dispatch and the gymnasium wrapper."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iesguard.attack import Adversary, AdversaryBudget, ItdsaSpec
from iesguard.environment import (
    ACTION_DIM, OBS_DIM, IesEnv, ObservationScaler, SystemParams, decode_action, reset, step,
)
from iesguard.exceptions import ContractViolationError, EpisodeDoneError, ValidationError
from iesguard.harness.profiles import generate_profiles
from iesguard.pricing import benchmarks


def _rollout(profile, params, actions, seed, adversary=None):
    rng = np.random.default_rng(seed)
    scaler = ObservationScaler.fit([profile])
    state = reset(profile, params, rng)
    results = []
    for a in actions:
        result = step(state, a, params, rng, scaler, adversary)
        results.append(result)
        state = result.next_state
    return results


def _random_actions(seed, n=24):
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, ACTION_DIM))


# ---------------------------------------------------------------------------
# Observation scaler
# ---------------------------------------------------------------------------

def test_scaler_bounds(profiles):
    scaler = ObservationScaler.fit(profiles)
    assert scaler.low.shape == (OBS_DIM,)
    assert scaler.low[0] == 0.0 and scaler.high[0] == 1.0
    assert scaler.high[-1] == 23.0
    obs = scaler.normalize(reset(profiles[0], SystemParams(), np.random.default_rng(0)).native_observation())
    assert np.all(np.abs(obs) <= 1.0)


def test_scaler_constant_component_maps_to_zero(constant_day):
    scaler = ObservationScaler.fit([constant_day])
    state = reset(constant_day, SystemParams(), np.random.default_rng(0))
    assert scaler.normalize(state.native_observation())[4] == 0.0
    assert scaler.normalize_component(4, 1e6) == 0.0


def test_scaler_rejects_empty_and_inverted():
    with pytest.raises(ValidationError):
        ObservationScaler.fit([])
    with pytest.raises(ValidationError):
        ObservationScaler(np.ones(OBS_DIM), np.zeros(OBS_DIM))


# ---------------------------------------------------------------------------
# Reset and step
# ---------------------------------------------------------------------------

def test_reset_starts_at_initial_storage(constant_day, params, rng):
    state = reset(constant_day, params, rng)
    assert state.hour == 0
    assert state.c_esd == params.esd.initial
    assert state.c_hsd == params.hsd.initial
    assert state.t_in_prev == params.building.t_comfort
    assert state.prev_action is None
    assert state.ledger_e.outstanding == ()


def test_episode_is_24_steps(profiles, params):
    results = _rollout(profiles[0], params, _random_actions(0), seed=1)
    assert [r.next_state.hour for r in results] == list(range(1, 25))
    assert [r.done for r in results] == [False] * 23 + [True]


def test_step_after_end_raises(profiles, params):
    last = _rollout(profiles[0], params, _random_actions(0), seed=1)[-1].next_state
    scaler = ObservationScaler.fit(profiles)
    with pytest.raises(EpisodeDoneError):
        step(last, np.zeros(ACTION_DIM), params, np.random.default_rng(0), scaler)


@settings(max_examples=10)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3, 4]))
def test_balances_close_under_random_actions(seed, scenario):
    params = SystemParams().for_scenario(scenario)
    profile = generate_profiles(1, seed=seed)[0]
    for result in _rollout(profile, params, _random_actions(seed), seed=seed):
        d = result.info['dispatch']
        assert max(abs(r) for r in d.balance_residuals()) < 1e-6
        for flow in (d.esd_ch, d.esd_dc, d.hsd_ch, d.hsd_dc, d.h_backup, d.h_dump, d.p_unserved, d.q_unserved):
            assert flow >= 0.0


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_storage_stays_in_band(seed):
    params = SystemParams()
    profile = generate_profiles(1, seed=seed)[0]
    for result in _rollout(profile, params, _random_actions(seed), seed=seed):
        s = result.next_state
        assert params.esd.lower - 1e-9 <= s.c_esd <= params.esd.c_max + 1e-9
        assert params.hsd.lower - 1e-9 <= s.c_hsd <= params.hsd.c_max + 1e-9
        assert 0.0 <= s.soc_esd <= 1.0


def test_reward_is_profit_minus_penalties(profiles, params):
    for result in _rollout(profiles[1], params, _random_actions(3), seed=3):
        info = result.info
        assert info['profit'] == pytest.approx(info['revenue'] - info['cost'])
        assert result.reward == pytest.approx(info['profit'] - (info['c1'] + info['c2']))
        assert info['c1'] >= 0.0 and info['c2'] >= 0.0


def test_first_step_has_no_ramp_penalty(profiles, params):
    first = _rollout(profiles[0], params, _random_actions(5, n=1), seed=5)[0]
    assert first.info['c1'] == 0.0


def test_without_storage_soc_is_zero(profiles):
    params = SystemParams().for_scenario(4)
    for result in _rollout(profiles[0], params, _random_actions(2), seed=2):
        assert result.next_state.c_hsd == 0.0
        assert result.next_state.soc_hsd == 0.0


def test_step_is_reproducible(profiles, params):
    a = _rollout(profiles[0], params, _random_actions(8), seed=8)
    b = _rollout(profiles[0], params, _random_actions(8), seed=8)
    assert [r.reward for r in a] == [r.reward for r in b]
    assert all(np.array_equal(x.observation, y.observation) for x, y in zip(a, b))


def test_adversary_changes_observations_only(profiles, params):
    actions = _random_actions(4)
    adversary = Adversary('itdsa', AdversaryBudget(epsilon=0.5), ItdsaSpec(lam=0.3, t0=0), params.building, seed=0)
    clean = _rollout(profiles[0], params, actions, seed=4)
    attacked = _rollout(profiles[0], params, actions, seed=4, adversary=adversary)
    for c, a in zip(clean, attacked):
        assert c.reward == a.reward
        assert c.next_state.c_esd == a.next_state.c_esd
        assert c.next_state.t_in_prev == a.next_state.t_in_prev
    assert any(not np.array_equal(c.observation, a.observation) for c, a in zip(clean, attacked))


# ---------------------------------------------------------------------------
# Action decoding
# ---------------------------------------------------------------------------

def test_decode_rejects_bad_actions(constant_day, params, rng):
    state = reset(constant_day, params, rng)
    with pytest.raises(ContractViolationError):
        decode_action(np.zeros(5), state, params)
    with pytest.raises(ContractViolationError):
        decode_action(np.array([0.0, 0.0, np.nan, 0.0, 0.0, 0.0]), state, params)


def test_decode_clips_and_flags(constant_day, params, rng):
    state = reset(constant_day, params, rng)
    action = decode_action(np.array([2.0, -3.0, 0.0, 0.0, 0.0, 0.0]), state, params)
    assert action.raw[:2] == (1.0, -1.0)
    assert action.clamped[0] and action.clamped[1]
    assert action.p_p2g == params.converters.p2g_range[1]
    assert action.p_eb == params.converters.eb_range[0]


def test_prices_pinned_without_demand_response(constant_day, rng):
    params = SystemParams().for_scenario(2)
    state = reset(constant_day, params, rng)
    action = decode_action(np.ones(ACTION_DIM), state, params)
    bench_p, bench_q, bench_h = benchmarks(constant_day.tou, params.pricing, 0)
    assert (action.price_p, action.price_q, action.price_h) == (bench_p, bench_q, bench_h)


# ---------------------------------------------------------------------------
# Gymnasium wrapper
# ---------------------------------------------------------------------------

def test_env_spaces(profiles):
    env = IesEnv(profiles, seed=0)
    assert env.observation_space.shape == (OBS_DIM,)
    assert env.action_space.shape == (ACTION_DIM,)
    obs, info = env.reset()
    assert env.observation_space.contains(obs)


def test_env_cycles_days_and_honours_options(profiles):
    env = IesEnv(profiles, seed=0)
    assert [env.reset()[1]['day'] for _ in range(4)] == [
        profiles[0].day_index, profiles[1].day_index, profiles[2].day_index, profiles[0].day_index]
    assert env.reset(options={'day': 2})[1]['day'] == profiles[2].day_index


def test_env_full_episode(profiles):
    env = IesEnv(profiles, seed=0)
    env.reset(seed=11)
    terminated, steps = False, 0
    while not terminated:
        obs, reward, terminated, truncated, info = env.step(env.action_space.sample())
        assert not truncated
        assert np.isfinite(reward)
        steps += 1
    assert steps == 24


def test_env_requires_reset_and_profiles(profiles):
    with pytest.raises(ValidationError):
        IesEnv([])
    with pytest.raises(RuntimeError):
        IesEnv(profiles).step(np.zeros(ACTION_DIM))
