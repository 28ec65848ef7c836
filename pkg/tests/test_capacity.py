import numpy as np
import pytest

from cellprobe.capacity import capacity_sweep, fit_network, loglog_slope
from cellprobe.datasets import sine_mixture_task
from cellprobe.metrics import ProbeConfig, characterize_network
from cellprobe.training import TrainConfig


@pytest.fixture(scope="module")
def task():
    return sine_mixture_task(length=120, window=10).split()


def test_single_size_equals_manual_pipeline(task):
    train_set, test_set = task
    cfg = TrainConfig(seed=5, epochs=3, learning_rate=0.01)
    (point,) = capacity_sweep([8], train_set, test_set, cfg)
    from dataclasses import replace

    from cellprobe.ablation import evaluate

    model, _ = fit_network(8, train_set, replace(cfg, seed=5 ^ 8))
    chars = characterize_network(model)
    amps = np.array([c.sine.amplitude for c in chars])
    assert point.N == 8 and not point.failed
    assert point.stats["amplitude"] == (amps.mean(), amps.std())
    assert point.abs_amplitude == (np.abs(amps).mean(), np.abs(amps).std())
    assert point.test_score == evaluate(model, test_set.X, test_set.y)


@pytest.mark.parametrize("sizes", [[8, 8], [16, 8], [], [0, 4]])
def test_bad_sizes_rejected(task, sizes):
    with pytest.raises(ValueError):
        capacity_sweep(sizes, *task, TrainConfig(epochs=0))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_recorded_and_sweep_continues(task):
    cfg = TrainConfig(epochs=2, optimizer="sgd", learning_rate=1e308, grad_clip_norm=1e308)
    points = capacity_sweep([2, 4], *task, cfg)
    assert [p.N for p in points] == [2, 4]
    assert all(p.failed and p.error for p in points)


def test_loglog_slope_of_inverse_law():
    from cellprobe.capacity import CapacityPoint

    points = [CapacityPoint(N, {}, (3.0 / N, 0.0), 0.0) for N in (8, 16, 32, 64)]
    assert loglog_slope(points) == pytest.approx(-1.0)


def test_probe_config_passed_through(task):
    from dataclasses import replace

    train_set, test_set = task
    cfg = TrainConfig(epochs=1)
    probe = ProbeConfig(T=40, sine_frequency=0.25)
    (point,) = capacity_sweep([4], train_set, test_set, cfg, probe)
    model, _ = fit_network(4, train_set, replace(cfg, seed=4))
    settle = [c.step.settling_time for c in characterize_network(model, probe)]
    assert point.stats["settling_time"] == (np.mean(settle), np.std(settle))
