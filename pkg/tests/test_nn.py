"""MLP gradients, policy head, Adam and checkpoints."""
import numpy as np
import pytest

from iesguard.exceptions import CheckpointError, DimensionMismatchError, MissingCheckpointError, StaleCacheError
from iesguard.nn import (
    AdamState, Checkpoint, MlpParams, adam_step, backward, deterministic_action, dumps_checkpoint, forward,
    load_checkpoint, loads_checkpoint, mean_head, policy_backward, predict, sample_action, save_checkpoint,
    soft_update,
)


def _numeric_grads(net, loss, h=1e-6):
    """Central differences of ``loss(net)`` for every parameter entry."""
    grads = []
    arrays = net.arrays()
    for k, a in enumerate(arrays):
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            for sign in (1.0, -1.0):
                shifted = [x.copy() for x in arrays]
                shifted[k][idx] += sign * h
                g[idx] += sign * loss(net.with_arrays(shifted)) / (2 * h)
        grads.append(g)
    return grads


# ---------------------------------------------------------------------------
# MLP
# ---------------------------------------------------------------------------

def test_forward_shapes(tiny_net, rng):
    assert tiny_net.sizes == (4, 8, 8, 3)
    assert predict(tiny_net, rng.normal(size=4)).shape == (3,)
    assert predict(tiny_net, rng.normal(size=(5, 4))).shape == (5, 3)
    with pytest.raises(DimensionMismatchError):
        predict(tiny_net, np.zeros(3))


def test_backward_matches_finite_differences(tiny_net, rng):
    x = rng.normal(size=(6, 4))
    c = rng.normal(size=(6, 3))
    y, cache = forward(tiny_net, x)
    grads = backward(tiny_net, cache, c)

    numeric = _numeric_grads(tiny_net, lambda net: float(np.sum(predict(net, x) * c)))
    for analytic, approx in zip(grads.arrays(), numeric):
        assert analytic == pytest.approx(approx, abs=1e-5)


def test_input_gradient(tiny_net, rng):
    x = rng.normal(size=4)
    c = rng.normal(size=3)
    _, cache = forward(tiny_net, x)
    dx = backward(tiny_net, cache, c).dx
    h = 1e-6
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        numeric = (predict(tiny_net, x + e) @ c - predict(tiny_net, x - e) @ c) / (2 * h)
        assert dx[i] == pytest.approx(numeric, abs=1e-5)


def test_stale_cache_rejected(tiny_net, rng):
    _, cache = forward(tiny_net, rng.normal(size=4))
    newer = tiny_net.with_arrays(tiny_net.arrays())
    assert newer.version == tiny_net.version + 1
    with pytest.raises(StaleCacheError):
        backward(newer, cache, np.ones(3))


def test_mismatched_layers_rejected():
    with pytest.raises(DimensionMismatchError):
        MlpParams((np.zeros((3, 4)), np.zeros((2, 5))), (np.zeros(3), np.zeros(2)))


# ---------------------------------------------------------------------------
# Soft update
# ---------------------------------------------------------------------------

def test_soft_update_endpoints(rng):
    target = MlpParams.init((4, 8, 3), rng)
    online = MlpParams.init((4, 8, 3), rng)
    copied = soft_update(target, online, 1.0)
    kept = soft_update(target, online, 0.0)
    for a, b in zip(copied.arrays(), online.arrays()):
        assert np.array_equal(a, b)
    for a, b in zip(kept.arrays(), target.arrays()):
        assert np.array_equal(a, b)


def test_soft_update_converges_geometrically(rng):
    target = MlpParams.init((4, 8, 3), rng)
    online = MlpParams.init((4, 8, 3), rng)
    tau, n = 0.1, 20
    start = target.weights[0] - online.weights[0]
    for _ in range(n):
        target = soft_update(target, online, tau)
    assert target.weights[0] - online.weights[0] == pytest.approx((1 - tau) ** n * start)


def test_soft_update_rejects_bad_inputs(rng):
    a = MlpParams.init((4, 8, 3), rng)
    with pytest.raises(DimensionMismatchError):
        soft_update(a, MlpParams.init((4, 6, 3), rng), 0.5)
    with pytest.raises(ValueError):
        soft_update(a, a, 1.5)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

def test_adam_zero_learning_rate_is_identity(tiny_net, rng):
    grads = [rng.normal(size=a.shape) for a in tiny_net.arrays()]
    updated, st = adam_step(tiny_net, grads, AdamState.for_net(tiny_net, lr=0.0))
    assert st.step == 1
    for a, b in zip(updated.arrays(), tiny_net.arrays()):
        assert np.array_equal(a, b)


def test_adam_first_step_moves_by_learning_rate(tiny_net, rng):
    grads = [rng.normal(size=a.shape) for a in tiny_net.arrays()]
    updated, _ = adam_step(tiny_net, grads, AdamState.for_net(tiny_net, lr=1e-3))
    # bias-corrected first step is lr * sign(g)
    for new, old, g in zip(updated.arrays(), tiny_net.arrays(), grads):
        assert new - old == pytest.approx(-1e-3 * np.sign(g), abs=1e-8)


def test_adam_shape_mismatch(tiny_net):
    with pytest.raises(DimensionMismatchError):
        adam_step(tiny_net, tiny_net.arrays()[:-1], AdamState.for_net(tiny_net, lr=1e-3))


# ---------------------------------------------------------------------------
# Policy head
# ---------------------------------------------------------------------------

def test_sample_action_bounds_and_mean_head(rng):
    policy = MlpParams.init((9, 16, 12), rng)
    obs = rng.uniform(-1, 1, size=(5, 9))
    sample = sample_action(policy, obs, rng.normal(size=(5, 6)))
    assert sample.action.shape == (5, 6)
    assert np.all(np.abs(sample.action) < 1.0)
    assert sample.log_prob.shape == (5,)
    assert np.tanh(predict(mean_head(policy), obs)) == pytest.approx(deterministic_action(policy, obs))


def test_policy_backward_matches_finite_differences(rng):
    policy = MlpParams.init((3, 6, 4), rng)
    obs = rng.uniform(-1, 1, size=(4, 3))
    noise = rng.normal(size=(4, 2))
    g_a = rng.normal(size=(4, 2))
    g_lp = rng.normal(size=4)

    def loss(net):
        s = sample_action(net, obs, noise)
        return float(np.sum(g_a * s.action) + np.sum(g_lp * s.log_prob))

    sample = sample_action(policy, obs, noise)
    grads = policy_backward(policy, sample, g_a, g_lp)
    for analytic, approx in zip(grads.arrays(), _numeric_grads(policy, loss)):
        assert analytic == pytest.approx(approx, abs=1e-4)


def test_odd_policy_width_rejected(tiny_net, rng):
    with pytest.raises(DimensionMismatchError):
        sample_action(tiny_net, rng.normal(size=4), rng.normal(size=1))


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def _checkpoint(rng):
    return Checkpoint(MlpParams.init((9, 16, 12), rng), np.zeros(9), np.arange(9.0),
                      {'algorithm': 'sa-sac', 'scenario': 1, 'seed': 3})


def test_checkpoint_round_trip_is_bit_exact(rng, tmp_path):
    ckpt = _checkpoint(rng)
    path = save_checkpoint(tmp_path / 'ckpt' / 'policy.cbor', ckpt)
    loaded = load_checkpoint(path)
    for a, b in zip(loaded.policy.arrays(), ckpt.policy.arrays()):
        assert a.tobytes() == b.tobytes()
    assert np.array_equal(loaded.obs_high, ckpt.obs_high)
    assert loaded.meta == ckpt.meta
    assert dumps_checkpoint(loaded) == dumps_checkpoint(ckpt)


def test_checkpoint_errors(rng, tmp_path):
    with pytest.raises(MissingCheckpointError):
        load_checkpoint(tmp_path / 'absent.cbor')
    with pytest.raises(CheckpointError):
        loads_checkpoint(b'not cbor at all \xff\xff')
    with pytest.raises(CheckpointError):
        loads_checkpoint(dumps_checkpoint(_checkpoint(rng))[:-10])
