"""scikit-learn style wrappers around training and response characterization."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dynamics import Model, forward
from .metrics import METRIC_NAMES, ProbeConfig, characterize_network, metric_values, rank_cells
from .report import summary_stats
from .training import TrainConfig, init_model, train


def _check_sequences(X, n_features=None):
    """Accept ``(B, T)`` for scalar inputs or ``(B, T, m)``; returns a 3-D float array."""
    X = check_array(X, allow_nd=True, ensure_2d=True, dtype=float)
    if X.ndim == 2:
        X = X[:, :, None]
    if X.ndim != 3:
        raise ValueError(f"expected sequences of shape (n_samples, T) or (n_samples, T, m), got {X.shape}")
    if n_features is not None and X.shape[2] != n_features:
        raise ValueError(f"X has {X.shape[2]} input channels, but the model was fitted with {n_features}")
    return X


class _BaseLSTM(BaseEstimator):
    _task_kind = None

    def __init__(
        self,
        n_cells=32,
        epochs=100,
        batch_size=32,
        learning_rate=1e-3,
        optimizer="adam",
        grad_clip_norm=1.0,
        init_scale=None,
        forget_bias=0.0,
        random_state=0,
    ):
        self.n_cells = n_cells
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.grad_clip_norm = grad_clip_norm
        self.init_scale = init_scale
        self.forget_bias = forget_bias
        self.random_state = random_state

    def _train_config(self):
        return TrainConfig(
            seed=int(self.random_state or 0),
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
            grad_clip_norm=self.grad_clip_norm,
            init_scale=self.init_scale,
            forget_bias=self.forget_bias,
        )

    def _fit(self, X, targets, n_outputs):
        cfg = self._train_config()
        sizes = [self.n_cells] if np.isscalar(self.n_cells) else list(self.n_cells)
        model = init_model(
            sizes, X.shape[2], n_outputs, self._task_kind, cfg.seed, cfg.init_scale, cfg.forget_bias
        )
        self.model_, self.loss_history_ = train(model, X, targets, cfg)
        self.n_features_in_ = X.shape[2]
        return self

    def _raw_output(self, X):
        check_is_fitted(self, "model_")
        return forward(self.model_, _check_sequences(X, self.n_features_in_))


class LSTMRegressor(RegressorMixin, _BaseLSTM):
    """One-step-ahead LSTM regressor read out from the final time step."""

    _task_kind = "regression"

    def fit(self, X, y):
        X = _check_sequences(X)
        y = np.asarray(y, dtype=float)
        self._single_output = y.ndim == 1
        Y = y.reshape(len(y), -1)
        if len(Y) != len(X):
            raise ValueError(f"{len(X)} sequences but {len(Y)} targets")
        return self._fit(X, Y, Y.shape[1])

    def predict(self, X):
        out = self._raw_output(X)
        return out[:, 0] if self._single_output else out


class LSTMClassifier(ClassifierMixin, _BaseLSTM):
    """Sequence classifier with a softmax head on the final time step."""

    _task_kind = "classification"

    def fit(self, X, y):
        X = _check_sequences(X)
        self.classes_, encoded = np.unique(np.asarray(y), return_inverse=True)
        if len(encoded) != len(X):
            raise ValueError(f"{len(X)} sequences but {len(encoded)} labels")
        return self._fit(X, encoded, len(self.classes_))

    def predict_proba(self, X):
        logits = self._raw_output(X)
        e = np.exp(logits - logits.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.classes_[np.argmax(self._raw_output(X), axis=1)]


def _as_model(obj):
    if isinstance(obj, Model):
        return obj
    check_is_fitted(obj, "model_")
    return obj.model_


class ResponseCharacterizer(TransformerMixin, BaseEstimator):
    """Step and sine response metrics of every cell of a trained network.

    ``fit`` takes a :class:`~cellprobe.dynamics.Model` or a fitted
    :class:`LSTMRegressor` / :class:`LSTMClassifier`; ``transform`` returns
    one row per cell with columns in :data:`METRIC_NAMES` order.
    """

    def __init__(self, probe_T=100, step_amplitude=1.0, sine_frequency=None, sine_amplitude=1.0, band=0.9, channel=None):
        self.probe_T = probe_T
        self.step_amplitude = step_amplitude
        self.sine_frequency = sine_frequency
        self.sine_amplitude = sine_amplitude
        self.band = band
        self.channel = channel

    def probe_config(self):
        return ProbeConfig(
            self.probe_T, self.step_amplitude, self.sine_frequency, self.sine_amplitude, self.band, self.channel
        )

    def fit(self, X, y=None):
        self.characterizations_ = characterize_network(_as_model(X), self.probe_config())
        self.summary_ = summary_stats(self.characterizations_)
        return self

    def transform(self, X):
        chars = characterize_network(_as_model(X), self.probe_config())
        return np.column_stack([metric_values(chars, name) for name in METRIC_NAMES])

    def rank(self, metric, order="ascending"):
        check_is_fitted(self, "characterizations_")
        return rank_cells(self.characterizations_, metric, order)

    def get_feature_names_out(self, input_features=None):
        return np.array(METRIC_NAMES, dtype=object)
