"""Retraining at several network sizes and tracking metric distributions."""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .ablation import evaluate
from .exceptions import NumericalError
from .metrics import METRIC_NAMES, characterize_network, metric_values, summarize
from .training import TrainConfig, init_model, train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapacityPoint:
    N: int
    stats: dict = field(default_factory=dict)
    abs_amplitude: tuple = (np.nan, np.nan)
    test_score: float = np.nan
    failed: bool = False
    error: str = ""


def fit_network(n_cells, train_set, config, n_outputs=None, callback=None):
    """Initialize and train a network with ``n_cells`` cells (an int or one size per layer)."""
    if n_outputs is None:
        n_outputs = (
            int(np.max(train_set.y)) + 1 if train_set.task_kind == "classification" else train_set.y.shape[-1]
        )
    sizes = [n_cells] if np.isscalar(n_cells) else list(n_cells)
    model = init_model(
        sizes,
        train_set.X.shape[2],
        n_outputs,
        train_set.task_kind,
        seed=config.seed,
        init_scale=config.init_scale,
        forget_bias=config.forget_bias,
    )
    return train(model, train_set.X, train_set.y, config, callback)


def capacity_point(model, N, test_set, probe):
    chars = characterize_network(model, probe)
    stats = {name: summarize(metric_values(chars, name)) for name in METRIC_NAMES}
    abs_amp = summarize(np.abs(metric_values(chars, "amplitude")))
    return CapacityPoint(N, stats, abs_amp, evaluate(model, test_set.X, test_set.y))


def capacity_sweep(sizes, train_set, test_set, config=None, probe=None):
    """Train from scratch at each size (seed ``config.seed ^ N``) and summarize every cell.

    A size whose training diverges yields a point with ``failed=True``;
    the sweep carries on.
    """
    config = config or TrainConfig()
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("capacity sweep needs at least one size")
    if any(s <= 0 for s in sizes):
        raise ValueError(f"network sizes must be positive, got {sizes}")
    if len(set(sizes)) != len(sizes) or sizes != sorted(sizes):
        raise ValueError(f"network sizes must be distinct and ascending, got {sizes}")
    points = []
    for N in sizes:
        cfg = replace(config, seed=config.seed ^ N)
        try:
            model, _ = fit_network(N, train_set, cfg)
        except NumericalError as err:
            logger.warning("training diverged at N=%d: %s", N, err)
            points.append(CapacityPoint(N, failed=True, error=str(err)))
            continue
        points.append(capacity_point(model, N, test_set, probe))
        logger.info("N=%d test score %.4g", N, points[-1].test_score)
    return points


def loglog_slope(points, key="abs_amplitude"):
    """Least-squares slope of log(mean metric) against log(N) over successful points."""
    ok = [p for p in points if not p.failed]
    N = np.log([p.N for p in ok])
    v = np.log([getattr(p, key)[0] for p in ok])
    return float(np.polyfit(N, v, 1)[0])
