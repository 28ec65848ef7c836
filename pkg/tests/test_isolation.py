import math

import numpy as np
import pytest

from cellprobe.dynamics import LstmParams, lstm_rollout
from cellprobe.isolation import extract_cell_subsystem, subsystem_rollout
from cellprobe.signals import make_sine, make_step

from .conftest import random_model

# fixed point of c = tanh(1) sigma(10) + sigma(-10) c is tanh(1); y* = sigma(10) tanh(tanh(1))
FIXED_POINT_C = 0.7615941559557649
FIXED_POINT_Y = 0.6419858458996874


def labeled_params():
    # entry (r, c) = 10 r + c, so every weight names its own position
    W = np.array([[10.0 * r + c for c in range(5)] for r in range(8)])
    return LstmParams(W, np.arange(8) / 100)


def test_index_map_on_labeled_matrix():
    sub = extract_cell_subsystem(labeled_params(), 1)
    # rows 1, 3, 5, 7; recurrent column m + u = 4
    assert sub.w_rec.tolist() == [14.0, 34.0, 54.0, 74.0]
    # input columns 0..2 summed: 30 r + 3
    assert sub.w_in.tolist() == [33.0, 93.0, 153.0, 213.0]
    assert sub.b.tolist() == [0.01, 0.03, 0.05, 0.07]


def test_row_sum_of_input_weights():
    W = np.zeros((4, 4))
    W[0, :3] = [0.5, -0.2, 0.1]
    sub = extract_cell_subsystem(LstmParams(W), 0)
    assert sub.w_in[0] == pytest.approx(0.4, abs=1e-15)


def test_single_channel_probe_mode():
    sub = extract_cell_subsystem(labeled_params(), 1, channel=2)
    assert sub.w_in.tolist() == [12.0, 32.0, 52.0, 72.0]
    with pytest.raises(IndexError):
        extract_cell_subsystem(labeled_params(), 1, channel=3)


def test_out_of_range_cell():
    with pytest.raises(IndexError):
        extract_cell_subsystem(labeled_params(), 2)
    with pytest.raises(IndexError):
        extract_cell_subsystem(labeled_params(), -1)


def test_single_cell_network_matches_full_rollout(rng):
    p = random_model(rng, sizes=(1,), m=1).layers[0]
    for signal in (make_step(50), make_sine(50, 0.1)):
        trace = subsystem_rollout(extract_cell_subsystem(p, 0), signal)
        full = lstm_rollout(p, signal.samples)
        assert np.max(np.abs(trace.y - [s.y[0] for s in full])) <= 1e-12
        assert np.max(np.abs(trace.c - [s.c[0] for s in full])) <= 1e-12


def test_one_live_channel_matches_full_rollout(rng):
    W = np.zeros((4, 4))
    W[:, 1] = rng.normal(size=4)
    W[:, 3] = rng.normal(size=4)
    p = LstmParams(W, rng.normal(size=4))
    signal = make_sine(60, 0.05)
    xs = rng.normal(size=(60, 3))
    xs[:, 1] = signal.samples
    trace = subsystem_rollout(extract_cell_subsystem(p, 0), signal)
    assert np.max(np.abs(trace.y - [s.y[0] for s in lstm_rollout(p, xs)])) <= 1e-12


def test_zero_subsystem_stays_at_rest():
    trace = subsystem_rollout(extract_cell_subsystem(LstmParams(np.zeros((8, 4))), 0), make_sine(40, 0.2))
    assert np.all(trace.y == 0) and np.all(trace.c == 0)


def test_converges_to_fixed_point():
    W = np.zeros((4, 2))
    W[:, 0] = [1.0, 10.0, -10.0, 10.0]
    sub = extract_cell_subsystem(LstmParams(W), 0)
    trace = subsystem_rollout(sub, np.ones(100))
    assert trace.c[-1] == pytest.approx(FIXED_POINT_C, abs=1e-12)
    assert trace.y[-1] == pytest.approx(FIXED_POINT_Y, abs=1e-12)
    # first step straight from the definition
    s = lambda a: 1 / (1 + math.exp(-a))
    assert trace.c[0] == pytest.approx(math.tanh(1) * s(10), abs=1e-15)


@pytest.mark.parametrize("T", [2, 3, 17, 100])
def test_trace_length(rng, T):
    p = random_model(rng, sizes=(3,), m=2).layers[0]
    trace = subsystem_rollout(extract_cell_subsystem(p, 2), make_step(T))
    assert len(trace) == T and trace.kind == "step"


def test_rejects_short_or_nonfinite_signal():
    sub = extract_cell_subsystem(labeled_params(), 0)
    with pytest.raises(ValueError):
        subsystem_rollout(sub, [1.0])
    with pytest.raises(ValueError):
        subsystem_rollout(sub, [1.0, np.inf, 0.0])


def test_bounded_output(rng):
    for _ in range(30):
        p = random_model(rng, sizes=(3,), m=2, scale=4.0).layers[0]
        for u in range(3):
            trace = subsystem_rollout(extract_cell_subsystem(p, u), make_sine(80, 0.1, 3.0))
            assert np.all(np.abs(trace.y) < 1)


def test_other_cells_do_not_affect_extraction(rng):
    p = random_model(rng, sizes=(3,), m=2).layers[0]
    W = np.array(p.W)
    for g in range(4):
        W[g * 3 + 0] = rng.normal(size=5)
        W[g * 3 + 2] = rng.normal(size=5)
    a = extract_cell_subsystem(p, 1)
    b = extract_cell_subsystem(LstmParams(W, p.b), 1)
    for field in ("w_in", "w_rec", "b"):
        assert np.array_equal(getattr(a, field), getattr(b, field))
