"""Built-in synthetic tasks and file ingestion (single-column CSV, IDX images)."""

import csv
import gzip
import logging
import struct
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class Dataset:
    """Input sequences ``X`` of shape ``(B, T, m)`` with targets ``y``."""

    X: np.ndarray
    y: np.ndarray
    task_kind: str
    name: str = ""
    scale: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.X)

    def split(self, fraction=0.8):
        """Chronological train/test split (no shuffling)."""
        cut = int(round(len(self) * fraction))
        if not 0 < cut < len(self):
            raise ValueError(f"split fraction {fraction} leaves an empty part of {len(self)} samples")
        head = Dataset(self.X[:cut], self.y[:cut], self.task_kind, self.name, self.scale)
        tail = Dataset(self.X[cut:], self.y[cut:], self.task_kind, self.name, self.scale)
        return head, tail


def minmax_scale(values):
    """Scale to [0, 1]; a constant series maps to 0.5."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        logger.warning("constant series; min-max scaling is degenerate, mapping every value to 0.5")
        return np.full_like(values, 0.5), {"min": lo, "max": hi}
    return (values - lo) / (hi - lo), {"min": lo, "max": hi}


def sliding_windows(series, window, horizon=1, name=""):
    """One-step-ahead regression samples from a scaled univariate series."""
    series = np.asarray(series, dtype=float)
    if horizon != 1:
        raise ValueError("only horizon=1 is supported")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if len(series) < window + 1:
        raise ValueError(f"series of length {len(series)} is too short for window {window}")
    scaled, scale = minmax_scale(series)
    idx = np.arange(window)[None, :] + np.arange(len(series) - window)[:, None]
    X = scaled[idx][:, :, None]
    y = scaled[window:][:, None]
    return Dataset(X, y, "regression", name, scale)


def sine_mixture_series(length=400, periods=(20.0, 7.0), weights=(0.6, 0.4), noise=0.05, seed=0):
    """Sum of sinusoids with the given periods (in steps), optional Gaussian noise."""
    t = np.arange(length)
    series = sum(w * np.sin(2 * np.pi * t / p) for w, p in zip(weights, periods))
    if noise:
        series = series + np.random.default_rng(seed).normal(0.0, noise, length)
    return series


def sine_mixture_task(length=400, window=20, **kwargs):
    """Forecast the next value of a sine mixture from the previous ``window`` values."""
    return sliding_windows(sine_mixture_series(length, **kwargs), window, name="sine-mixture")


def frequency_task(n_samples=128, T=40, freqs=(0.05, 0.2), noise=0.05, seed=0):
    """Two-class sequences: which of two frequencies a noisy, random-phase sine carries."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n_samples) % len(freqs)
    rng.shuffle(labels)
    t = np.arange(1, T + 1)
    phase = rng.uniform(0, 2 * np.pi, n_samples)
    f = np.asarray(freqs)[labels]
    X = np.sin(2 * np.pi * f[:, None] * t[None, :] + phase[:, None])
    X = 0.5 + 0.5 * X + rng.normal(0.0, noise, X.shape)
    return Dataset(np.clip(X, 0.0, 1.0)[:, :, None], labels, "classification", "frequency")


def load_series_csv(path, window, horizon=1):
    """Sliding-window regression dataset from a single numeric column (optional header)."""
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 1:
                raise ValueError(f"{path}:{lineno}: expected a single column, got {len(row)}")
            try:
                values.append(float(row[0]))
            except ValueError:
                if lineno == 1 and not values:
                    continue
                raise ValueError(f"{path}:{lineno}: non-numeric value {row[0]!r}") from None
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: series contains non-finite values")
    return sliding_windows(np.array(values), window, horizon, name=str(path))


_IDX_DTYPES = {0x08: ">u1", 0x09: ">i1", 0x0B: ">i2", 0x0C: ">i4", 0x0D: ">f4", 0x0E: ">f8"}


def read_idx(path):
    """Read an IDX file (optionally gzipped) into a numpy array."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[0] != 0 or data[1] != 0:
        raise ValueError(f"{path}: bad IDX magic number")
    code, ndim = data[2], data[3]
    if code not in _IDX_DTYPES:
        raise ValueError(f"{path}: unknown IDX element type 0x{code:02x}")
    header = 4 + 4 * ndim
    if len(data) < header:
        raise ValueError(f"{path}: truncated IDX header")
    shape = struct.unpack(f">{ndim}I", data[4:header])
    dtype = np.dtype(_IDX_DTYPES[code])
    count = int(np.prod(shape)) if shape else 1
    if len(data) - header != count * dtype.itemsize:
        raise ValueError(f"{path}: IDX payload size does not match shape {shape}")
    return np.frombuffer(data, dtype=dtype, offset=header).reshape(shape)


def write_idx(path, array):
    array = np.asarray(array)
    codes = {np.dtype(v).newbyteorder("="): k for k, v in _IDX_DTYPES.items()}
    code = codes[array.dtype.newbyteorder("=")]
    with open(path, "wb") as fh:
        fh.write(bytes([0, 0, code, array.ndim]))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(array.astype(_IDX_DTYPES[code]).tobytes())


def load_row_stacked_images(path_images, path_labels, downsample=1):
    """Classification dataset of images flattened row by row into scalar sequences.

    Pixels are scaled to [0, 1]. ``downsample`` averages non-overlapping
    ``k x k`` blocks first, e.g. 2 turns 28x28 into 14x14 (length 196).
    """
    images = read_idx(path_images)
    labels = read_idx(path_labels)
    if images.ndim != 3:
        raise ValueError(f"{path_images}: expected a 3-D image array, got shape {images.shape}")
    if labels.ndim != 1 or len(labels) != len(images):
        raise ValueError(f"{len(images)} images but label array of shape {labels.shape}")
    images = images.astype(float)
    hi = 255.0 if images.max() > 1.0 else 1.0
    images = images / hi
    if downsample > 1:
        k = downsample
        N, H, W = images.shape
        images = images[:, : H - H % k, : W - W % k]
        images = images.reshape(N, H // k, k, W // k, k).mean(axis=(2, 4))
    X = images.reshape(len(images), -1)[:, :, None]
    return Dataset(X, labels.astype(int), "classification", str(path_images))
