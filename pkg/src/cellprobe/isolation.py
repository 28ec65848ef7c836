"""Decoupling a single LSTM cell into a scalar-state subsystem."""

from dataclasses import dataclass

import numpy as np

from .dynamics import GATE_ORDER, sigmoid
from .exceptions import NonFiniteError


@dataclass(frozen=True)
class CellSubsystem:
    """One cell's effective input weights, self-recurrence and biases, each in (z, i, f, o) order."""

    cell_index: int
    w_in: np.ndarray
    w_rec: np.ndarray
    b: np.ndarray
    layer: int = 1


@dataclass(frozen=True)
class ResponseTrace:
    x: np.ndarray
    y: np.ndarray
    c: np.ndarray
    kind: str
    signal: object = None

    def __len__(self):
        return len(self.y)


def extract_cell_subsystem(params, u, channel=None):
    """Cut cell ``u`` out of ``params``, dropping its couplings to other cells.

    A scalar probe is broadcast to every input channel, so the effective
    input weight per gate is the row sum over input columns. Passing
    ``channel`` probes that single input column instead.
    """
    n, m = params.n, params.m
    if not 0 <= u < n:
        raise IndexError(f"cell index {u} out of range for {n} cells")
    rows = [k * n + u for k in range(len(GATE_ORDER))]
    if channel is None:
        w_in = params.W[rows, :m].sum(axis=1)
    else:
        if not 0 <= channel < m:
            raise IndexError(f"input channel {channel} out of range for {m} inputs")
        w_in = params.W[rows, channel].copy()
    w_rec = params.W[rows, m + u].copy()
    b = params.b[rows].copy()
    return CellSubsystem(u, w_in, w_rec, b, params.layer_index)


def subsystem_rollout(sub, signal):
    """Drive the scalar cell from rest with ``signal`` and record x, y and c."""
    x = np.asarray(getattr(signal, "samples", signal), dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError(f"probe signal must be 1-D with length >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("probe signal contains non-finite values")
    T = len(x)
    ys = np.empty(T)
    cs = np.empty(T)
    pre = np.outer(x, sub.w_in) + sub.b
    c = y = 0.0
    for t in range(T):
        a = pre[t] + sub.w_rec * y
        z = np.tanh(a[0])
        i, f, o = sigmoid(a[1:])
        c = z * i + f * c
        y = o * np.tanh(c)
        ys[t] = y
        cs[t] = c
    return ResponseTrace(x, ys, cs, getattr(signal, "kind", None), signal)
