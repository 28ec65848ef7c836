"""Single-cell knockout at inference time and its comparison with response metrics."""

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import spearmanr

from .dynamics import LstmParams, Model, forward
from .metrics import metric_values

# metrics whose magnitude, not sign, predicts importance
ABSOLUTE_METRICS = ("delta_response", "amplitude")


@dataclass(frozen=True)
class AblationRecord:
    cell_index: int
    baseline_score: float
    ablated_score: float
    layer: int = 1

    @property
    def impact(self):
        return self.ablated_score - self.baseline_score


def _check_cell(model, layer, u):
    if not 1 <= layer <= len(model.layers):
        raise IndexError(f"layer {layer} out of range for a {len(model.layers)}-layer model")
    n = model.layers[layer - 1].n
    if not 0 <= u < n:
        raise IndexError(f"cell {u} out of range for layer {layer} with {n} cells")


def ablate_cell(model, layer, u):
    """Copy of ``model`` whose cell ``u`` of ``layer`` (1-based) outputs 0 at every step.

    The cell state keeps evolving but is never read. ``model`` is untouched.
    """
    _check_cell(model, layer, u)
    return replace(model, ablated=model.ablated | {(layer, u)})


def ablate_cell_weights(model, layer, u):
    """Same knockout done by zeroing every weight that reads cell ``u``'s output.

    That is the cell's recurrent column in its own layer plus the matching
    input column of the next layer, or the head column for the last layer.
    """
    _check_cell(model, layer, u)
    layers = list(model.layers)
    params = layers[layer - 1]
    W = np.array(params.W)
    W[:, params.m + u] = 0.0
    layers[layer - 1] = LstmParams(W, params.b, params.layer_index)
    head = np.array(model.head_weights)
    if layer < len(layers):
        nxt = layers[layer]
        W = np.array(nxt.W)
        W[:, u] = 0.0
        layers[layer] = LstmParams(W, nxt.b, nxt.layer_index)
    else:
        head[:, u] = 0.0
    return Model(layers, head, model.head_bias, model.task_kind, dict(model.provenance), model.ablated)


def evaluate(model, X, y):
    """Misclassification rate (classification) or mean absolute error (regression)."""
    if len(X) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    out = forward(model, X)
    if model.task_kind == "classification":
        labels = np.asarray(y).astype(int).reshape(-1)
        return float(np.mean(np.argmax(out, axis=1) != labels))
    y = np.asarray(y, dtype=float).reshape(out.shape)
    return float(np.mean(np.abs(out - y)))


def ablation_sweep(model, X, y, layer=None):
    """Knock out each cell of ``layer`` (default: last) in turn and score the result."""
    layer = len(model.layers) if layer is None else layer
    _check_cell(model, layer, 0)
    baseline = evaluate(model, X, y)
    return [
        AblationRecord(u, baseline, evaluate(ablate_cell(model, layer, u), X, y), layer)
        for u in range(model.layers[layer - 1].n)
    ]


def impact_metric_correlation(records, chars, metric):
    """Spearman correlation between a response metric and ablation impact.

    ``delta_response`` and ``amplitude`` enter by absolute value. Records
    and characterizations are matched on (layer, cell index). Returns NaN
    when either side is constant.
    """
    if len(records) < 3:
        raise ValueError(f"need at least 3 cells for a rank correlation, got {len(records)}")
    by_cell = {(c.layer, c.cell_index): c for c in chars}
    try:
        matched = [by_cell[(r.layer, r.cell_index)] for r in records]
    except KeyError as err:
        raise ValueError(f"no characterization for ablated cell {err.args[0]}") from None
    values = metric_values(matched, metric)
    if metric in ABSOLUTE_METRICS:
        values = np.abs(values)
    impacts = np.array([r.impact for r in records])
    if np.ptp(values) == 0 or np.ptp(impacts) == 0:
        return float("nan")
    return float(spearmanr(values, impacts).statistic)
