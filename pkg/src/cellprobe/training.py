"""Backpropagation through time and a small deterministic trainer."""

import logging
from dataclasses import asdict, dataclass, replace

import numpy as np

from .dynamics import LstmParams, Model, as_batch, forward
from .exceptions import NumericalError

logger = logging.getLogger(__name__)

LOSSES = ("mse", "cross_entropy")


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip_norm: float = 1.0
    loss: str = None
    init_scale: float = None
    forget_bias: float = 0.0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        for name in ("batch_size", "learning_rate", "grad_clip_norm", "eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")
        if self.loss is not None and self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.init_scale is not None and not self.init_scale > 0:
            raise ValueError("init_scale must be positive")

    def resolved_loss(self, task_kind):
        if self.loss is not None:
            return self.loss
        return "cross_entropy" if task_kind == "classification" else "mse"

    def to_dict(self):
        return asdict(self)


def init_model(sizes, n_inputs, n_outputs, task_kind="regression", seed=0, init_scale=None, forget_bias=0.0):
    """Uniform initialization in ``(-r, r)`` with ``r = 1/sqrt(m + n)`` per layer."""
    if isinstance(sizes, int):
        sizes = [sizes]
    rng = np.random.default_rng(seed)
    layers = []
    m = n_inputs
    for k, n in enumerate(sizes):
        r = init_scale if init_scale is not None else 1.0 / np.sqrt(m + n)
        W = rng.uniform(-r, r, size=(4 * n, m + n))
        b = np.zeros(4 * n)
        b[2 * n : 3 * n] = forget_bias
        layers.append(LstmParams(W, b, layer_index=k + 1))
        m = n
    r = 1.0 / np.sqrt(m)
    head_w = rng.uniform(-r, r, size=(n_outputs, m))
    return Model(layers, head_w, np.zeros(n_outputs), task_kind)


def parameter_arrays(model):
    """Flat list ``[W1, b1, ..., WL, bL, head_W, head_b]``."""
    out = []
    for p in model.layers:
        out += [p.W, p.b]
    return out + [model.head_weights, model.head_bias]


def with_parameters(model, arrays):
    """Copy of ``model`` with parameters taken from a :func:`parameter_arrays`-ordered list."""
    layers = [
        LstmParams(arrays[2 * k], arrays[2 * k + 1], layer_index=p.layer_index)
        for k, p in enumerate(model.layers)
    ]
    return Model(layers, arrays[-2], arrays[-1], model.task_kind, dict(model.provenance), model.ablated)


def _loss_and_grad(out, Y, loss):
    B = out.shape[0]
    if loss == "mse":
        Y = np.asarray(Y, dtype=float).reshape(out.shape)
        diff = out - Y
        return float(np.mean(diff**2)), 2.0 * diff / diff.size
    labels = np.asarray(Y).astype(int).reshape(B)
    shifted = out - out.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    value = -float(np.mean(logp[np.arange(B), labels]))
    dout = np.exp(logp)
    dout[np.arange(B), labels] -= 1.0
    return value, dout / B


def _layer_backward(params, cache, dys):
    X, gates, cs, ys, keep = (cache[k] for k in ("X", "gates", "cs", "ys", "keep"))
    B, T, n = ys.shape
    m = params.m
    Wx, Wh = params.W_in, params.W_rec
    dW = np.zeros_like(params.W)
    db = np.zeros_like(params.b)
    dX = np.empty_like(X)
    dy_rec = np.zeros((B, n))
    dc_next = np.zeros((B, n))
    zeros = np.zeros((B, n))
    for t in range(T - 1, -1, -1):
        dy = dys[:, t] + dy_rec
        if keep is not None:
            dy = dy * keep
        g = gates[:, t]
        z, i, f, o = g[:, :n], g[:, n : 2 * n], g[:, 2 * n : 3 * n], g[:, 3 * n :]
        tc = np.tanh(cs[:, t])
        c_prev = cs[:, t - 1] if t > 0 else zeros
        y_prev = ys[:, t - 1] if t > 0 else zeros
        dc = dc_next + dy * o * (1.0 - tc**2)
        da = np.concatenate(
            [
                dc * i * (1.0 - z**2),
                dc * z * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                dy * tc * o * (1.0 - o),
            ],
            axis=1,
        )
        dc_next = dc * f
        dW[:, :m] += da.T @ X[:, t]
        dW[:, m:] += da.T @ y_prev
        db += da.sum(axis=0)
        dX[:, t] = da @ Wx
        dy_rec = da @ Wh
    return dX, dW, db


def bptt_gradients(model, X, Y, loss=None, masks=None):
    """Loss value and exact gradients of the mean batch loss.

    Gradients come back as a list ordered like :func:`parameter_arrays`.
    """
    loss = loss or ("cross_entropy" if model.task_kind == "classification" else "mse")
    if loss not in LOSSES:
        raise ValueError(f"loss must be one of {LOSSES}, got {loss!r}")
    X = as_batch(X, model.n_inputs)
    caches = []
    out = forward(model, X, masks, caches)
    value, dout = _loss_and_grad(out, Y, loss)
    if not np.isfinite(value):
        raise NumericalError(f"non-finite {loss} loss ({value}); max |output| = {np.max(np.abs(out)):.3g}")
    last = caches[-1]["ys"][:, -1]
    d_head_w = dout.T @ last
    d_head_b = dout.sum(axis=0)
    dys = np.zeros_like(caches[-1]["ys"])
    dys[:, -1] = dout @ model.head_weights
    grads = [d_head_w, d_head_b]
    for params, cache in zip(reversed(model.layers), reversed(caches)):
        dys, dW, db = _layer_backward(params, cache, dys)
        grads = [dW, db] + grads
    return value, grads


class _Adam:
    def __init__(self, shapes, cfg):
        self.cfg = cfg
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        c = self.cfg
        self.t += 1
        lr = c.learning_rate * np.sqrt(1 - c.beta2**self.t) / (1 - c.beta1**self.t)
        out = []
        for k, (p, g) in enumerate(zip(params, grads)):
            self.m[k] = c.beta1 * self.m[k] + (1 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1 - c.beta2) * g * g
            out.append(p - lr * self.m[k] / (np.sqrt(self.v[k]) + c.eps))
        return out


class _SGD:
    def __init__(self, shapes, cfg):
        self.lr = cfg.learning_rate

    def step(self, params, grads):
        return [p - self.lr * g for p, g in zip(params, grads)]


def clip_global_norm(grads, max_norm):
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if norm > max_norm:
        grads = [g * (max_norm / norm) for g in grads]
    return grads, norm


def train(model, X, Y, config=None, callback=None):
    """Minibatch training; returns ``(trained_model, loss_history)``.

    ``loss_history`` holds the mean training loss of every epoch.
    ``callback(epoch, model, history)`` runs after each epoch, e.g. for
    checkpointing. Raises :class:`NumericalError` (carrying the history so
    far) if the loss becomes non-finite.
    """
    config = config or TrainConfig()
    loss = config.resolved_loss(model.task_kind)
    X = as_batch(X, model.n_inputs)
    Y = np.asarray(Y)
    if len(Y) != len(X):
        raise ValueError(f"{len(X)} input sequences but {len(Y)} targets")
    rng = np.random.default_rng(config.seed)
    params = [np.array(p) for p in parameter_arrays(model)]
    opt = (_Adam if config.optimizer == "adam" else _SGD)([p.shape for p in params], config)
    history = []
    current = model
    for epoch in range(config.epochs):
        order = rng.permutation(len(X))
        total = 0.0
        for start in range(0, len(X), config.batch_size):
            idx = order[start : start + config.batch_size]
            try:
                value, grads = bptt_gradients(current, X[idx], Y[idx], loss)
            except NumericalError as err:
                raise NumericalError(f"epoch {epoch}: {err}", history) from err
            grads, _ = clip_global_norm(grads, config.grad_clip_norm)
            params = opt.step(params, grads)
            if not all(np.all(np.isfinite(p)) for p in params):
                raise NumericalError(f"epoch {epoch}: parameters became non-finite", history)
            current = with_parameters(current, params)
            total += value * len(idx)
        history.append(total / len(X))
        logger.debug("epoch %d loss %.6g", epoch, history[-1])
        if callback is not None:
            callback(epoch, current, history)
    if config.epochs == 0:
        current = replace(model)
    return current, history
