import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cellprobe.dynamics import (
    LstmParams,
    LstmState,
    Model,
    forward,
    lstm_rollout,
    lstm_step,
    network_predict,
    rnn_step,
    sigmoid,
)
from cellprobe.exceptions import NonFiniteError, ShapeError

from . import oracles
from .conftest import as_lists, random_model

# c = tanh(1) * sigma(1), y = sigma(1) * tanh(c), from the scalar oracle
ONES_C1 = 0.5567699411459397
ONES_Y1 = 0.36960635293570576
# second step with x = 1 and y_prev = ONES_Y1 (pre-activation 1 + y1)
ONES_C2 = 1.1444461579991028
ONES_Y2 = 0.6505352232008134


def ones_params():
    return LstmParams(np.ones((4, 2)), np.zeros(4))


def test_zero_weights_give_zero_state():
    p = LstmParams(np.zeros((12, 5)))
    s = lstm_step(p, LstmState.zeros(3), [0.3, -2.0])
    assert np.all(s.c == 0) and np.all(s.y == 0)


def test_unit_weights_single_step():
    s = lstm_step(ones_params(), LstmState.zeros(1), [1.0])
    assert s.c[0] == pytest.approx(ONES_C1, abs=1e-15)
    assert s.y[0] == pytest.approx(ONES_Y1, abs=1e-15)


def test_saturated_gates_flush_cell():
    p = LstmParams(np.zeros((4, 2)), [0.0, 20.0, -20.0, 20.0])
    s = lstm_step(p, LstmState(np.array([0.5]), np.array([0.0])), [7.0])
    assert abs(s.c[0]) <= 2.1e-9
    assert abs(s.y[0]) <= 2.1e-9


def test_rollout_two_steps_matches_hand_evaluation():
    states = lstm_rollout(ones_params(), [1.0, 1.0])
    assert states[0].c[0] == pytest.approx(ONES_C1, abs=1e-15)
    assert states[1].c[0] == pytest.approx(ONES_C2, abs=1e-15)
    assert states[1].y[0] == pytest.approx(ONES_Y2, abs=1e-15)


def test_rollout_single_step_equals_step(rng):
    p = random_model(rng).layers[0]
    x = rng.normal(size=2)
    (state,) = lstm_rollout(p, x[None])
    direct = lstm_step(p, LstmState.zeros(p.n), x)
    assert np.array_equal(state.c, direct.c) and np.array_equal(state.y, direct.y)


def test_rollout_rejects_empty_and_nonfinite():
    p = ones_params()
    with pytest.raises(ValueError):
        lstm_rollout(p, np.zeros((0, 1)))
    with pytest.raises(NonFiniteError):
        lstm_rollout(p, [1.0, np.nan])


def test_step_shape_errors_name_shapes():
    p = LstmParams(np.zeros((8, 5)))
    with pytest.raises(ShapeError, match=r"expected shape \(3,\)"):
        lstm_step(p, LstmState.zeros(2), [1.0])
    with pytest.raises(ShapeError):
        lstm_step(p, LstmState.zeros(3), [1.0, 2.0, 3.0])


def test_params_validation():
    with pytest.raises(ShapeError):
        LstmParams(np.zeros((6, 4)))
    with pytest.raises(ShapeError):
        LstmParams(np.zeros((8, 5)), np.zeros(7))
    with pytest.raises(NonFiniteError):
        LstmParams(np.full((4, 2), np.inf))


def test_model_layer_chain_checked(rng):
    a = LstmParams(rng.normal(size=(12, 5)))
    b = LstmParams(rng.normal(size=(8, 4)), layer_index=2)
    with pytest.raises(ShapeError):
        Model([a, b], np.zeros((1, 2)), [0.0])
    with pytest.raises(ShapeError):
        Model([a], np.zeros((1, 2)), [0.0])


@pytest.mark.parametrize(
    "W, h_prev, x, expected",
    [
        ([[0.0, 0.0]], [0.4], [0.9], 0.0),
        ([[1.0, 0.0]], [3.0], [1.0], math.tanh(1.0)),
        ([[0.0, 1.0]], [0.0], [5.0], 0.0),
    ],
)
def test_rnn_step(W, h_prev, x, expected):
    assert rnn_step(W, h_prev, x)[0] == pytest.approx(expected, abs=1e-15)


def test_rnn_step_shape_error():
    with pytest.raises(ShapeError):
        rnn_step(np.zeros((2, 3)), [0, 0], [0, 0])


def test_logistic_stable_for_large_inputs():
    a = np.array([-1000.0, -40.0, 0.0, 40.0, 1000.0])
    with np.errstate(over="raise"):
        s = sigmoid(a)
    assert s[0] == 0.0 and s[-1] == 1.0 and s[2] == 0.5
    assert np.all(np.isfinite(s))


def test_zero_model_outputs_head_bias():
    layers = [LstmParams(np.zeros((12, 4)))]
    model = Model(layers, np.zeros((2, 3)), [0.25, -1.5])
    out = network_predict(model, np.random.default_rng(0).normal(size=(9, 1)))
    assert np.array_equal(out, [0.25, -1.5])


def test_identity_head_reads_designated_cell(rng):
    p = random_model(rng, sizes=(3,), m=1).layers[0]
    xs = rng.normal(size=(7, 1))
    head = np.zeros((1, 3))
    head[0, 2] = 1.0
    model = Model([p], head, [0.0])
    assert network_predict(model, xs)[0] == lstm_rollout(p, xs)[-1].y[2]


def test_two_layer_model_matches_straight_line_oracle(rng):
    model = random_model(rng, sizes=(5, 3), m=2, p=2)
    layers, hw, hb = as_lists(model)
    for _ in range(5):
        xs = rng.normal(size=(12, 2))
        expected = oracles.network_predict(layers, hw, hb, xs.tolist())
        assert np.max(np.abs(network_predict(model, xs) - expected)) <= 1e-12


def test_batched_forward_equals_per_sequence(rng):
    model = random_model(rng, sizes=(4, 2), m=3, p=2)
    X = rng.normal(size=(6, 10, 3))
    batch = forward(model, X)
    for k in range(6):
        np.testing.assert_allclose(batch[k], forward(model, X[k : k + 1])[0], rtol=0, atol=1e-14)


# ---- properties ----

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@st.composite
def params_and_inputs(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 3))
    T = draw(st.integers(1, 25))
    W = draw(arrays(np.float64, (4 * n, m + n), elements=st.floats(-5, 5)))
    b = draw(arrays(np.float64, (4 * n,), elements=st.floats(-5, 5)))
    xs = draw(arrays(np.float64, (T, m), elements=finite))
    return LstmParams(W, b), xs


@settings(max_examples=150, deadline=None)
@given(params_and_inputs())
def test_output_bounded_and_cell_growth_limited(case):
    params, xs = case
    for t, s in enumerate(lstm_rollout(params, xs), start=1):
        assert np.all(np.abs(s.y) <= 1.0)
        assert np.all(np.abs(s.c) <= t)


@settings(max_examples=100, deadline=None)
@given(params_and_inputs(), st.data())
def test_rollout_composition(case, data):
    params, xs = case
    split = data.draw(st.integers(0, len(xs)))
    full = lstm_rollout(params, xs)
    if split == 0 or split == len(xs):
        return
    first = lstm_rollout(params, xs[:split])
    second = lstm_rollout(params, xs[split:], init=first[-1])
    for a, b in zip(full, first + second):
        assert np.array_equal(a.c, b.c) and np.array_equal(a.y, b.y)


def test_strict_bounds_for_moderate_inputs(rng):
    for _ in range(20):
        p = random_model(rng, sizes=(5,), m=2, scale=2.0).layers[0]
        for s in lstm_rollout(p, rng.normal(size=(30, 2))):
            assert np.all(np.abs(s.y) < 1.0)


def test_determinism(rng):
    model = random_model(rng, sizes=(6,), m=2)
    X = rng.normal(size=(4, 15, 2))
    assert np.array_equal(forward(model, X), forward(model, X))


def permute_model(model, perm):
    """Relabel cells of a single-layer model by ``perm`` (new index k holds old cell perm[k])."""
    (p,) = model.layers
    n, m = p.n, p.m
    rows = np.concatenate([g * n + np.asarray(perm) for g in range(4)])
    cols = np.concatenate([np.arange(m), m + np.asarray(perm)])
    W = p.W[rows][:, cols]
    return Model([LstmParams(W, p.b[rows])], model.head_weights[:, perm], model.head_bias, model.task_kind)


def test_permutation_equivariance(rng):
    model = random_model(rng, sizes=(6,), m=2)
    perm = rng.permutation(6)
    permuted = permute_model(model, perm)
    xs = rng.normal(size=(20, 2))
    ys = np.array([s.y for s in lstm_rollout(model.layers[0], xs)])
    ys_p = np.array([s.y for s in lstm_rollout(permuted.layers[0], xs)])
    np.testing.assert_allclose(ys_p, ys[:, perm], rtol=0, atol=1e-14)
    assert network_predict(permuted, xs)[0] == pytest.approx(network_predict(model, xs)[0], abs=1e-14)
