import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aquacast.errors import NumericalError, ShapeError
from aquacast.nn import kernels
from aquacast.nn.layers import GRU, Dense, dense_forward, gru_cell_forward, time_distributed_forward, xavier_uniform
from aquacast.nn.network import Branched, Sequential, param_count
from aquacast.nn.optim import AdamState, adam_step


def fd_check(net, X, y, n_params=120, eps=1e-5, seed=0):
    """Max relative error between backprop and central differences of the MSE."""
    def loss():
        return float(np.mean((net.forward(X) - y) ** 2))

    pred = net.forward(X, train=True)
    net.backward(2.0 * (pred - y) / pred.size)
    analytic = np.concatenate([g.ravel() for g in net.grads])
    theta = net.get_flat()
    rng = np.random.default_rng(seed)
    idx = rng.choice(theta.size, min(n_params, theta.size), replace=False)
    worst = 0.0
    for i in idx:
        t = theta.copy()
        t[i] += eps
        net.set_flat(t)
        up = loss()
        t[i] -= 2 * eps
        net.set_flat(t)
        down = loss()
        num = (up - down) / (2 * eps)
        denom = max(abs(num), abs(analytic[i]), 1e-7)
        worst = max(worst, abs(num - analytic[i]) / denom)
    net.set_flat(theta)
    return worst


def test_xavier_bounds_and_determinism():
    L = math.sqrt(2.0)
    w = xavier_uniform(1, 2, seed=0)
    assert w.shape == (2, 1)
    assert np.all(np.abs(w) <= L)
    assert np.array_equal(xavier_uniform(3, 4, 7), xavier_uniform(3, 4, 7))
    big = np.concatenate([xavier_uniform(50, 50, s).ravel() for s in range(40)])
    assert abs(big.var() / ((6 / 100) / 3) - 1) < 0.05


def test_gru_cell_examples():
    g = GRU(1, 1, seed=0)
    for p in g.params:
        p[...] = 0
    assert gru_cell_forward([3.0], [0.8], g)[0] == pytest.approx(0.4)
    assert gru_cell_forward([3.0], [0.0], g)[0] == 0.0
    g.W[...] = 1.0
    h = gru_cell_forward([1.0], [0.0], g)[0]
    z = 1 / (1 + math.exp(-1))
    assert h == pytest.approx(z * math.tanh(1.0), abs=1e-12)
    assert h == pytest.approx(0.55677, abs=1e-5)
    with pytest.raises(ShapeError):
        gru_cell_forward([1.0, 2.0], [0.0], g)


@pytest.mark.parametrize("inner,outer", [("sigmoid", "tanh"), ("relu", "tanh"), ("sigmoid", "linear")])
def test_layer_forward_matches_cell_loop(rng, inner, outer):
    g = GRU(3, 5, inner, outer, return_sequences=True, seed=1)
    g.b[...] = rng.normal(size=g.b.shape)
    X = rng.normal(size=(4, 7, 3))
    H = g.forward(X)
    for b in range(4):
        h = np.zeros(5)
        for t in range(7):
            h = gru_cell_forward(X[b, t], h, g)
            np.testing.assert_allclose(H[b, t], h, rtol=1e-12, atol=1e-13)


@given(st.integers(0, 10_000))
def test_gru_state_bounded(seed):
    rng = np.random.default_rng(seed)
    g = GRU(2, 4, seed=seed, return_sequences=True)
    g.U *= 5
    H = g.forward(rng.normal(scale=10, size=(3, 20, 2)))
    assert np.max(np.abs(H)) <= 1.0


def test_dense_examples():
    d = Dense(2, 2, "linear", seed=0)
    d.W[...] = np.eye(2)
    d.b[...] = 0
    assert dense_forward([1.5, -2.0], d).tolist() == [1.5, -2.0]
    d2 = Dense(2, 2, "relu", seed=0)
    d2.W[...] = np.eye(2)
    d2.b[...] = 0
    assert dense_forward([-1.0, 2.0], d2).tolist() == [0.0, 2.0]
    assert Dense(5, 50).param_count == 300


def test_time_distributed_equals_row_calls(rng):
    d = Dense(5, 7, "relu", seed=3)
    X = rng.normal(size=(96, 5))
    stacked = np.stack([dense_forward(row, d) for row in X])
    # gemm vs gemv may differ in summation order only
    np.testing.assert_allclose(time_distributed_forward(X, d), stacked, rtol=1e-14, atol=1e-15)


def test_hand_chain_rule_gradient():
    d = Dense(1, 1, "linear", seed=0)
    d.W[...] = 1.0
    d.b[...] = 0.0
    net = Sequential([d], (1,))
    x = np.array([[2.0]])
    pred = net.forward(x, train=True)
    net.backward(2 * (pred - 0.0) / pred.size)
    assert net.grads[0][0, 0] == 8.0
    net.forward(x, train=True)
    net.backward(np.zeros((1, 1)))
    assert all(np.all(g == 0) for g in net.grads)


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_gradients_sequential_gru_stack(backend, monkeypatch, rng):
    monkeypatch.setattr(kernels, "_impl", kernels.get_backend(backend))
    net = Sequential([Dense(3, 6, "relu", seed=1), Dense(6, 1, "linear", seed=2),
                      GRU(1, 4, return_sequences=True, seed=3), GRU(4, 1, "sigmoid", "linear", seed=4)],
                     (9, 3))
    for p in net.params:
        p += rng.normal(scale=0.1, size=p.shape)
    X = rng.normal(size=(5, 9, 3))
    y = rng.normal(size=(5, 1))
    assert fd_check(net, X, y, n_params=150) < 1e-4


def test_gradients_branched(rng):
    net = Branched([GRU(1, 3, "relu", "tanh", seed=1), GRU(1, 2, "relu", "tanh", seed=2)],
                   [Dense(5, 4, "relu", seed=3), Dense(4, 1, "linear", seed=4)], (2, 5))
    for p in net.params:
        p += rng.normal(scale=0.1, size=p.shape)
    X = rng.normal(size=(6, 2, 5))
    y = rng.normal(size=(6, 1))
    assert fd_check(net, X, y, n_params=80) < 1e-4


def test_input_gradient_sequential(rng):
    net = Sequential([GRU(2, 3, return_sequences=True, seed=1), GRU(3, 1, "sigmoid", "linear", seed=2)], (4, 2))
    X = rng.normal(size=(2, 4, 2))
    y = rng.normal(size=(2, 1))
    pred = net.forward(X, train=True)
    dX = net.backward(2 * (pred - y) / pred.size)
    eps = 1e-6
    num = np.zeros_like(X)
    for i in np.ndindex(X.shape):
        Xp = X.copy()
        Xp[i] += eps
        Xm = X.copy()
        Xm[i] -= eps
        num[i] = (np.mean((net.forward(Xp) - y) ** 2) - np.mean((net.forward(Xm) - y) ** 2)) / (2 * eps)
    np.testing.assert_allclose(dX, num, rtol=1e-5, atol=1e-9)


def test_param_count_formulas():
    assert GRU(1, 32).param_count == 3 * 32 * (1 + 32 + 1)
    assert GRU(32, 1).param_count == 102
    net = Sequential([GRU(1, 32, return_sequences=True), GRU(32, 1, "sigmoid", "linear")], (96, 1))
    assert param_count(net) == 3366


def test_shape_contract():
    net = Sequential([GRU(1, 2), Dense(2, 1)], (96, 1))
    with pytest.raises(ShapeError):
        net.forward(np.zeros((1, 95, 1)))
    with pytest.raises(ShapeError):
        net.set_flat(np.zeros(3))


def test_adam_examples():
    p = [np.zeros(1)]
    st_ = AdamState()
    adam_step(p, [np.ones(1)], st_, 0.001)
    assert p[0][0] == pytest.approx(-0.001 / (1 + 1e-8), abs=1e-15)
    assert p[0][0] == pytest.approx(-0.000999999990, abs=1e-12)
    before = p[0].copy()
    adam_step(p, [np.ones(1)], st_, 0.001)
    assert abs(abs(p[0][0] - before[0]) - 0.001) < 1e-9
    assert st_.t == 2
    q = [np.ones(2)]
    adam_step(q, [np.zeros(2)], AdamState(), 0.01)
    assert np.all(q[0] == 1.0)


def test_adam_against_reference_loop(rng):
    g_seq = rng.normal(size=(6, 3))
    p = [np.zeros(3)]
    state = AdamState()
    m = v = np.zeros(3)
    ref = np.zeros(3)
    for t, g in enumerate(g_seq, 1):
        adam_step(p, [g], state, 0.01)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        ref = ref - 0.01 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
    np.testing.assert_allclose(p[0], ref, rtol=1e-12, atol=1e-15)
