import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vitalrl.errors import ModelParseError, NumericalFailureError, ShapeError, UnsupportedVersionError
from vitalrl.neural import QNetwork, TargetSpec, forward, load, save, td_target, td_targets, train_step


def manual_forward(net, x):
    """Plain-loop reimplementation used as an independent oracle."""
    W1, b1, W2, b2 = (net.params[k].tolist() for k in ("W1", "b1", "W2", "b2"))
    hidden = []
    for j in range(len(b1)):
        z = b1[j]
        for i in range(len(x)):
            z += W1[j][i] * x[i]
        hidden.append(z if z > 0 else 0.0)
    out = []
    for k in range(len(b2)):
        q = b2[k]
        for j in range(len(hidden)):
            q += W2[k][j] * hidden[j]
        out.append(q)
    return out


def numeric_grads(net, states, actions, targets, eps=1e-5):
    grads = {}
    for name, p in net.params.items():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + eps
            up, _ = net.loss_and_grads(states, actions, targets)
            p[idx] = orig - eps
            down, _ = net.loss_and_grads(states, actions, targets)
            p[idx] = orig
            g[idx] = (up - down) / (2 * eps)
        grads[name] = g
    return grads


def assert_grads_close(analytic, numeric, rel=1e-4, floor=1e-7):
    for name in analytic:
        a, n = analytic[name], numeric[name]
        tol = np.maximum(rel * np.maximum(np.abs(a), np.abs(n)), floor)
        bad = np.abs(a - n) > tol
        assert not bad.any(), f"{name}: analytic {a[bad]} vs numeric {n[bad]}"


def test_zero_network_outputs_zero():
    net = QNetwork.zeros(3, 6)
    np.testing.assert_array_equal(net.forward([0.3, -2.0, 7.0]), np.zeros(5))


def test_bias_passthrough():
    net = QNetwork(2, 4, rng=np.random.default_rng(0))
    net.params["W2"][...] = 0.0
    net.params["b2"][...] = [1, 2, 3, 4, 5]
    np.testing.assert_array_equal(forward(net, [0.1, 0.9]), [1, 2, 3, 4, 5])


def test_forward_matches_manual_oracle():
    net = QNetwork(1, 4, rng=np.random.default_rng(2024))
    np.testing.assert_allclose(net.forward([0.5]), manual_forward(net, [0.5]), rtol=0, atol=1e-12)


def test_forward_batch_equals_rows():
    net = QNetwork(3, 8, rng=np.random.default_rng(1))
    x = np.random.default_rng(2).normal(size=(6, 3))
    batch = net.forward(x)
    for i in range(6):
        np.testing.assert_allclose(batch[i], manual_forward(net, x[i].tolist()), atol=1e-12)


def test_forward_shape_error():
    net = QNetwork(2, 4)
    with pytest.raises(ShapeError):
        net.forward([1.0, 2.0, 3.0])


def test_initialization_range():
    net = QNetwork(4, 16, rng=np.random.default_rng(3))
    assert np.all(np.abs(net.params["W1"]) <= 0.5)
    assert np.all(np.abs(net.params["W2"]) <= 0.25)


def test_td_target_examples():
    assert td_target(TargetSpec(10, 0.95, (1, 2, 3, 4, 5), False)) == pytest.approx(14.75)
    assert td_target(TargetSpec(-4, 0.5, (100, 0, 0, 0, 0), True)) == -4
    assert td_target(TargetSpec(0, 0.0, (9, 9, 9, 9, 9), False)) == 0


def test_vectorized_td_targets_agree():
    rng = np.random.default_rng(5)
    next_q = rng.normal(size=(20, 5))
    rewards = rng.integers(-4, 11, 20)
    done = rng.random(20) < 0.3
    batch = td_targets(rewards, 0.9, next_q, done)
    for i in range(20):
        assert batch[i] == td_target(TargetSpec(rewards[i], 0.9, tuple(next_q[i]), bool(done[i])))


def test_zero_gradient_fixed_point():
    net = QNetwork(1, 5, rng=np.random.default_rng(0))
    states = np.array([[0.2], [0.7]])
    actions = np.array([1, 3])
    targets = net.forward(states)[[0, 1], actions]
    before = {k: v.copy() for k, v in net.params.items()}
    loss = net.train_arrays(states, actions, targets)
    assert loss == 0.0
    for k in before:
        np.testing.assert_array_equal(net.params[k], before[k])


def test_repeated_training_reduces_loss():
    rng = np.random.default_rng(7)
    net = QNetwork(1, 24, learning_rate=1e-3, rng=rng)
    batch = [([x], int(a), float(t)) for x, a, t in
             zip(rng.random(32), rng.integers(0, 5, 32), rng.uniform(-4, 10, 32))]
    first = train_step(net, batch)
    for _ in range(199):
        last = train_step(net, batch)
    assert last < first


def test_finite_difference_tiny_net():
    net = QNetwork(1, 1, rng=np.random.default_rng(0))
    net.params["W1"][...] = 0.8
    net.params["b1"][...] = 0.1
    states, actions, targets = np.array([[0.6]]), np.array([2]), np.array([3.0])
    _, analytic = net.loss_and_grads(states, actions, targets)
    assert_grads_close(analytic, numeric_grads(net, states, actions, targets))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 8), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_gradients_match_finite_differences(d_in, d_h, batch, seed):
    rng = np.random.default_rng(seed)
    net = QNetwork(d_in, d_h, rng=rng)
    states = rng.normal(size=(batch, d_in))
    actions = rng.integers(0, 5, batch)
    targets = rng.uniform(-5, 15, batch)
    z = states @ net.params["W1"].T + net.params["b1"]
    if np.min(np.abs(z)) < 1e-3:  # relu kink inside the FD stencil
        return
    _, analytic = net.loss_and_grads(states, actions, targets)
    assert_grads_close(analytic, numeric_grads(net, states, actions, targets))


def test_untaken_outputs_get_no_gradient():
    net = QNetwork(1, 4, rng=np.random.default_rng(0))
    _, g = net.loss_and_grads(np.array([[0.4]]), np.array([2]), np.array([9.0]))
    assert np.all(g["W2"][[0, 1, 3, 4]] == 0) and np.all(g["b2"][[0, 1, 3, 4]] == 0)


def test_determinism():
    def run():
        rng = np.random.default_rng(11)
        net = QNetwork(2, 8, rng=np.random.default_rng(99))
        for _ in range(20):
            net.train_arrays(rng.random((8, 2)), rng.integers(0, 5, 8), rng.uniform(-4, 10, 8))
        return net
    a, b = run(), run()
    for k in a.params:
        assert a.params[k].tobytes() == b.params[k].tobytes()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1e-1, 1e-3, 1e-5]))
def test_adam_step_bound_and_nonnegative_loss(seed, lr):
    rng = np.random.default_rng(seed)
    net = QNetwork(2, 6, learning_rate=lr, rng=rng)
    for _ in range(5):
        before = {k: v.copy() for k, v in net.params.items()}
        loss = net.train_arrays(rng.random((4, 2)), rng.integers(0, 5, 4), rng.uniform(-4, 200, 4))
        assert loss >= 0
        for k in before:
            assert np.all(np.abs(net.params[k] - before[k]) <= 2 * lr)


def test_nan_target_raises_and_keeps_parameters():
    net = QNetwork(1, 3, rng=np.random.default_rng(0))
    before = save(net)
    with pytest.raises(NumericalFailureError):
        train_step(net, [([0.5], 1, float("nan"))])
    assert save(net) == before


def test_overflow_rolls_back():
    net = QNetwork(1, 3, learning_rate=1.7e308, rng=np.random.default_rng(0))
    snapshot = save(net)
    with pytest.raises(NumericalFailureError):
        net.train_arrays(np.array([[0.5]]), np.array([0]), np.array([1.0]))
    assert save(net) == snapshot
    assert net.step_count == 0


def test_save_load_round_trip_bitwise():
    rng = np.random.default_rng(4)
    net = QNetwork(3, 7, learning_rate=3e-4, rng=rng, vital="resp_rate")
    for _ in range(5):
        net.train_arrays(rng.random((4, 3)), rng.integers(0, 5, 4), rng.uniform(-4, 10, 4))
    net.seed, net.config = 17, {"alpha": 3e-4}
    back = load(save(net))
    x = rng.normal(size=(10, 3))
    assert back.forward(x).tobytes() == net.forward(x).tobytes()
    assert back.vital == net.vital and back.step_count == 5 and back.seed == 17
    for k in net.params:
        assert back.m[k].tobytes() == net.m[k].tobytes()
        assert back.v[k].tobytes() == net.v[k].tobytes()
    assert save(back) == save(net)


def test_truncated_document():
    text = save(QNetwork(1, 2))
    with pytest.raises(ModelParseError):
        load(text[: len(text) // 2])


def test_version_mismatch():
    doc = json.loads(save(QNetwork(1, 2)))
    doc["schema_version"] = 99
    with pytest.raises(UnsupportedVersionError):
        load(json.dumps(doc))


def test_error_names_field_path():
    doc = json.loads(save(QNetwork(1, 2)))
    doc["weights"]["W2"] = doc["weights"]["W2"][:-1]
    with pytest.raises(ModelParseError) as info:
        load(doc)
    assert info.value.path == "weights.W2"
    del doc["adam"]["step"]
    doc["weights"]["W2"].append(0.0)
    with pytest.raises(ModelParseError, match="adam.step"):
        load(doc)
