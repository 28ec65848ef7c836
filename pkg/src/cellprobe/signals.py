"""Step and sine probe inputs.

Formulas use 1-based time ``t = 1..T``; ``samples[k]`` holds time ``t = k + 1``.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_T = 100
DEFAULT_CYCLES = 10


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    kind: str
    amplitude: float
    frequency: float = None

    @property
    def T(self):
        return len(self.samples)

    @property
    def step_index(self):
        """0-based index of the first sample after the step (``t_step - 1``)."""
        if self.kind != "step":
            raise ValueError("step_index is only defined for step signals")
        return self.T // 2


def _check_length(T):
    if int(T) != T or T < 2:
        raise ValueError(f"probe length must be an integer >= 2, got {T}")
    return int(T)


def make_step(T=DEFAULT_T, amplitude=1.0):
    """``amplitude`` where ``t > T/2``, else 0."""
    T = _check_length(T)
    t = np.arange(1, T + 1)
    samples = np.where(t > T / 2, float(amplitude), 0.0)
    samples.setflags(write=False)
    return Signal(samples, "step", float(amplitude))


def make_sine(T=DEFAULT_T, f=None, amplitude=1.0):
    """``amplitude * sin(2 pi f t)``; ``f`` in cycles per step, defaulting to 10 cycles over T."""
    T = _check_length(T)
    if f is None:
        f = DEFAULT_CYCLES / T
    if not 0 < f <= 0.5:
        raise ValueError(f"sine frequency must lie in (0, 0.5] cycles/step, got {f}")
    t = np.arange(1, T + 1)
    samples = float(amplitude) * np.sin(2 * np.pi * f * t)
    samples.setflags(write=False)
    return Signal(samples, "sine", float(amplitude), float(f))
