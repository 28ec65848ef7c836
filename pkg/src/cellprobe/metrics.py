"""Step and sine response metrics, per-cell characterization and summaries."""

from dataclasses import dataclass

import numpy as np

from .isolation import extract_cell_subsystem, subsystem_rollout
from .signals import DEFAULT_T, make_sine, make_step

METRIC_NAMES = ("settling_time", "delta_response", "amplitude", "correlation", "frequency")
# |delta| below this counts as "never moved"
DELTA_EPS = 1e-6
# steady state = mean of the last 1/TAIL_DIVISOR of post-step samples
TAIL_DIVISOR = 10


@dataclass(frozen=True)
class StepMetrics:
    initial_response: float
    final_response: float
    delta_response: float
    settling_time: int


@dataclass(frozen=True)
class SineMetrics:
    amplitude: float
    frequency: float
    correlation: float
    cyclic: bool = True


@dataclass(frozen=True)
class CellCharacterization:
    cell_index: int
    step: StepMetrics
    sine: SineMetrics
    layer: int = 1

    def value(self, metric):
        if metric in ("settling_time", "delta_response", "initial_response", "final_response"):
            return getattr(self.step, metric)
        if metric in ("amplitude", "frequency", "correlation"):
            return getattr(self.sine, metric)
        raise KeyError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")


@dataclass(frozen=True)
class ProbeConfig:
    """Probe design shared by every cell of one characterization run."""

    T: int = DEFAULT_T
    step_amplitude: float = 1.0
    sine_frequency: float = None
    sine_amplitude: float = 1.0
    band: float = 0.9
    channel: int = None

    def step_signal(self):
        return make_step(self.T, self.step_amplitude)

    def sine_signal(self):
        return make_sine(self.T, self.sine_frequency, self.sine_amplitude)


def _require_kind(trace, kind):
    if trace.kind != kind:
        raise ValueError(f"expected a {kind} response trace, got {trace.kind!r}")


def step_metrics(trace, band=0.9):
    """Initial/final response, their difference and settling time of a step response.

    The final response is the mean of the last 10% of post-step samples.
    Settling time counts steps from the input change until the output
    enters the band ``(1 - band) * |delta|`` around the final value and
    stays there; it is capped at ``T - t_step`` when that never happens.
    """
    _require_kind(trace, "step")
    y = np.asarray(trace.y, dtype=float)
    s = len(y) // 2
    post = y[s:]
    if len(post) < 2:
        raise ValueError("step trace needs at least 2 post-step samples")
    tail = max(1, -(-len(post) // TAIL_DIVISOR))
    initial = float(y[s - 1])
    final = float(np.mean(post[-tail:]))
    delta = final - initial
    if abs(delta) < DELTA_EPS:
        return StepMetrics(initial, final, delta, 0)
    outside = np.flatnonzero(np.abs(post - final) > (1.0 - band) * abs(delta))
    settle = 0 if len(outside) == 0 else int(outside[-1]) + 1
    return StepMetrics(initial, final, delta, min(settle, len(post) - 1))


def periodogram(y):
    """Frequencies ``k/T`` and powers ``|DFT(y - mean)[k]|^2 / T`` for ``k = 1..T//2``."""
    y = np.asarray(y, dtype=float)
    T = len(y)
    if y.ndim != 1 or T < 4:
        raise ValueError(f"periodogram needs a 1-D sequence of length >= 4, got shape {y.shape}")
    spectrum = np.fft.rfft(y - y.mean())
    k = np.arange(1, T // 2 + 1)
    return k / T, np.abs(spectrum[k]) ** 2 / T


def dominant_frequency(y, with_flag=False):
    """Frequency (cycles/step) of the largest periodogram bin, lowest bin on ties.

    A flat spectrum yields 0.0; with ``with_flag`` a second value reports
    whether any cyclic content was found.
    """
    y = np.asarray(y, dtype=float)
    freqs, power = periodogram(y)
    scale = float(np.max(np.abs(y))) if len(y) else 0.0
    floor = (64 * np.finfo(float).eps * scale) ** 2 * len(y)
    cyclic = bool(power.max() > floor)
    f = float(freqs[int(np.argmax(power))]) if cyclic else 0.0
    return (f, cyclic) if with_flag else f


def correlation(x, y):
    """Unnormalized centered dot product ``sum((x - mean x) * (y - mean y))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"correlation needs equal lengths, got {x.shape} and {y.shape}")
    return float(np.dot(x - x.mean(), y - y.mean()))


def sine_metrics(trace):
    """Signed amplitude, dominant frequency and input/output correlation.

    Amplitude and frequency are read from the last half of the trace; the
    amplitude takes the sign of the input/output correlation over that
    same window.
    """
    _require_kind(trace, "sine")
    x = np.asarray(trace.x, dtype=float)
    y = np.asarray(trace.y, dtype=float)
    w = len(y) // 2
    xw, yw = x[w:], y[w:]
    half_swing = (yw.max() - yw.min()) / 2.0
    sign = np.sign(correlation(xw, yw))
    freq, cyclic = dominant_frequency(yw, with_flag=True)
    return SineMetrics(float(sign * half_swing), freq, correlation(x, y), cyclic)


def characterize_cell(params, u, probe=None):
    probe = probe or ProbeConfig()
    sub = extract_cell_subsystem(params, u, probe.channel)
    step = step_metrics(subsystem_rollout(sub, probe.step_signal()), probe.band)
    sine = sine_metrics(subsystem_rollout(sub, probe.sine_signal()))
    return CellCharacterization(u, step, sine, params.layer_index)


def characterize_network(model, probe=None, layers=None):
    """Characterize every cell, ordered by (layer, cell index)."""
    probe = probe or ProbeConfig()
    selected = model.layers if layers is None else [model.layers[k] for k in layers]
    return [characterize_cell(p, u, probe) for p in selected for u in range(p.n)]


def metric_values(chars, metric):
    if metric not in METRIC_NAMES:
        raise KeyError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")
    return np.array([c.value(metric) for c in chars], dtype=float)


def rank_cells(chars, metric, order="ascending"):
    """Cell indices sorted by ``metric``; ties keep ascending cell index."""
    if order not in ("ascending", "descending"):
        raise ValueError(f"order must be 'ascending' or 'descending', got {order!r}")
    values = metric_values(chars, metric)
    sign = 1.0 if order == "ascending" else -1.0
    idx = [c.cell_index for c in chars]
    ranked = sorted(range(len(chars)), key=lambda k: (sign * values[k], idx[k]))
    return [idx[k] for k in ranked]


def summarize(values):
    """Mean and population standard deviation."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot summarize an empty list")
    return float(values.mean()), float(values.std())


def format_summary(mean, std):
    return f"{mean:.2f} ± {std:.2f}"
