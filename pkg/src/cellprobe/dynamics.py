"""LSTM and vanilla RNN kinetics.

Gate rows of ``W`` are stacked in the order (z, i, f, o); columns are the
layer input followed by the layer's own previous output state::

    a = W @ [x ; y_prev] + b
    c = tanh(a_z) * sigma(a_i) + sigma(a_f) * c_prev
    y = sigma(a_o) * tanh(c)
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonFiniteError, ShapeError

GATE_ORDER = "zifo"
TASK_KINDS = ("classification", "regression")


def sigmoid(a):
    """Logistic function without overflow for large ``|a|``."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class LstmParams:
    """Weights of one LSTM layer.

    ``W`` has shape ``(4n, m + n)`` and ``b`` has shape ``(4n,)``.
    """

    W: np.ndarray
    b: np.ndarray = None
    layer_index: int = 1

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] % 4 or W.shape[0] == 0:
            raise ShapeError("W", "(4n, m+n)", W.shape)
        n = W.shape[0] // 4
        if W.shape[1] <= n:
            raise ShapeError("W", f"({4 * n}, m+{n}) with m >= 1", W.shape)
        b = np.zeros(4 * n) if self.b is None else np.array(self.b, dtype=float)
        if b.shape != (4 * n,):
            raise ShapeError("b", (4 * n,), b.shape)
        _check_finite("W", W)
        _check_finite("b", b)
        if self.layer_index < 1:
            raise ValueError(f"layer_index must be >= 1, got {self.layer_index}")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.W.shape[0] // 4

    @property
    def m(self):
        return self.W.shape[1] - self.n

    @property
    def W_in(self):
        return self.W[:, : self.m]

    @property
    def W_rec(self):
        return self.W[:, self.m :]

    def gate_block(self, gate):
        """Rows of ``W`` belonging to ``gate`` (one of 'z', 'i', 'f', 'o')."""
        k = GATE_ORDER.index(gate)
        return self.W[k * self.n : (k + 1) * self.n]


@dataclass(frozen=True)
class LstmState:
    c: np.ndarray
    y: np.ndarray

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n))


@dataclass(frozen=True)
class Model:
    """Stack of LSTM layers followed by an affine head on the last layer."""

    layers: tuple
    head_weights: np.ndarray
    head_bias: np.ndarray
    task_kind: str = "regression"
    provenance: dict = field(default_factory=dict, compare=False)
    ablated: frozenset = frozenset()

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a model needs at least one layer")
        for k in range(1, len(layers)):
            if layers[k].m != layers[k - 1].n:
                raise ShapeError(f"layer {k + 1} input", layers[k - 1].n, layers[k].m)
        Wh = np.atleast_2d(np.array(self.head_weights, dtype=float))
        bh = np.atleast_1d(np.array(self.head_bias, dtype=float))
        if Wh.shape[1] != layers[-1].n:
            raise ShapeError("head_weights", ("p", layers[-1].n), Wh.shape)
        if bh.shape != (Wh.shape[0],):
            raise ShapeError("head_bias", (Wh.shape[0],), bh.shape)
        _check_finite("head_weights", Wh)
        _check_finite("head_bias", bh)
        if self.task_kind not in TASK_KINDS:
            raise ValueError(f"task_kind must be one of {TASK_KINDS}, got {self.task_kind!r}")
        Wh.setflags(write=False)
        bh.setflags(write=False)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "head_weights", Wh)
        object.__setattr__(self, "head_bias", bh)
        ablated = frozenset((int(l), int(u)) for l, u in self.ablated)
        for l, u in ablated:
            if not (1 <= l <= len(layers) and 0 <= u < layers[l - 1].n):
                raise IndexError(f"ablated cell (layer {l}, cell {u}) does not exist")
        object.__setattr__(self, "ablated", ablated)

    @property
    def n_inputs(self):
        return self.layers[0].m

    @property
    def n_outputs(self):
        return self.head_weights.shape[0]

    @property
    def sizes(self):
        return [p.n for p in self.layers]

    def keep_masks(self):
        """Per-layer 0/1 output masks implied by ``ablated`` (None where nothing is silenced)."""
        masks = [None] * len(self.layers)
        for l, u in sorted(self.ablated):
            if masks[l - 1] is None:
                masks[l - 1] = np.ones(self.layers[l - 1].n)
            masks[l - 1][u] = 0.0
        return masks


def lstm_step(params, state, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (params.m,):
        raise ShapeError("x", (params.m,), x.shape)
    if state.c.shape != (params.n,) or state.y.shape != (params.n,):
        raise ShapeError("state", (params.n,), (state.c.shape, state.y.shape))
    _check_finite("x", x)
    n = params.n
    a = params.W @ np.concatenate([x, state.y]) + params.b
    z = np.tanh(a[:n])
    i = sigmoid(a[n : 2 * n])
    f = sigmoid(a[2 * n : 3 * n])
    o = sigmoid(a[3 * n :])
    c = z * i + f * state.c
    return LstmState(c, o * np.tanh(c))


def lstm_rollout(params, xs, init=None):
    """Apply :func:`lstm_step` along ``xs``; returns the list of states."""
    xs = _as_sequence(xs, params.m)
    state = LstmState.zeros(params.n) if init is None else init
    out = []
    for x in xs:
        state = lstm_step(params, state, x)
        out.append(state)
    return out


def rnn_step(weights, h_prev, x):
    """One vanilla RNN step, ``tanh(W @ [x ; h_prev])``."""
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    h_prev = np.atleast_1d(np.asarray(h_prev, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = W.shape[0]
    if W.shape != (n, 2 * n):
        raise ShapeError("weights", (n, 2 * n), W.shape)
    if h_prev.shape != (n,):
        raise ShapeError("h_prev", (n,), h_prev.shape)
    if x.shape != (n,):
        raise ShapeError("x", (n,), x.shape)
    return np.tanh(W @ np.concatenate([x, h_prev]))


def _as_sequence(xs, m):
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1 and m == 1:
        xs = xs[:, None]
    if xs.ndim != 2 or xs.shape[1] != m:
        raise ShapeError("input sequence", ("T", m), xs.shape)
    if xs.shape[0] == 0:
        raise ValueError("input sequence is empty")
    _check_finite("input sequence", xs)
    return xs


def as_batch(X, m):
    """Coerce ``X`` to shape ``(B, T, m)``; 2-D input is read as ``(B, T)`` when ``m == 1``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and m == 1:
        X = X[:, :, None]
    if X.ndim != 3 or X.shape[2] != m:
        raise ShapeError("input batch", ("B", "T", m), X.shape)
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("input batch is empty")
    _check_finite("input batch", X)
    return X


def layer_forward(params, X, keep=None, cache=None):
    """Batched rollout of one layer from zero state.

    ``X`` is ``(B, T, m)``; returns the output states ``(B, T, n)``.
    ``keep`` is an optional length-n 0/1 vector multiplied into the output
    state at every step (a zero silences that cell everywhere downstream).
    When ``cache`` is a dict it is filled with what backprop needs.
    """
    B, T, _ = X.shape
    n = params.n
    Wx, Wh, b = params.W_in, params.W_rec, params.b
    pre_in = X @ Wx.T + b
    y = np.zeros((B, n))
    c = np.zeros((B, n))
    ys = np.empty((B, T, n))
    if cache is not None:
        gates = np.empty((B, T, 4 * n))
        cs = np.empty((B, T, n))
    for t in range(T):
        a = pre_in[:, t] + y @ Wh.T
        z = np.tanh(a[:, :n])
        s = sigmoid(a[:, n:])
        c = z * s[:, :n] + s[:, n : 2 * n] * c
        y = s[:, 2 * n :] * np.tanh(c)
        if keep is not None:
            y = y * keep
        ys[:, t] = y
        if cache is not None:
            gates[:, t, :n] = z
            gates[:, t, n:] = s
            cs[:, t] = c
    if cache is not None:
        cache.update(X=X, gates=gates, cs=cs, ys=ys, keep=keep)
    return ys


def forward(model, X, masks=None, caches=None):
    """Batched network output ``(B, p)`` read from the final time step.

    ``masks`` holds one keep-vector (or None) per layer and defaults to the
    model's own ablation masks.
    """
    X = as_batch(X, model.n_inputs)
    if masks is None:
        masks = model.keep_masks()
    h = X
    for k, params in enumerate(model.layers):
        cache = None
        if caches is not None:
            cache = {}
            caches.append(cache)
        h = layer_forward(params, h, masks[k], cache)
    return h[:, -1] @ model.head_weights.T + model.head_bias


def network_predict(model, xs):
    """Output vector (logits or regression values) for one input sequence."""
    xs = _as_sequence(xs, model.n_inputs)
    return forward(model, xs[None])[0]


def hidden_trajectory(model, xs, layer=-1):
    """Output-state trajectory ``(T, n)`` of one layer for a single sequence."""
    xs = _as_sequence(xs, model.n_inputs)
    h = xs[None]
    layers = model.layers[: (layer % len(model.layers)) + 1]
    masks = model.keep_masks()
    for k, params in enumerate(layers):
        h = layer_forward(params, h, masks[k])
    return h[0]
