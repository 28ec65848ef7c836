"""Text model file with bit-exact float encoding.

A model file is JSON. Every float is stored as a hex-float string
(``float.hex``), so ``load_model(save_model(m))`` reproduces ``m`` exactly.
Weight matrices are flattened row-major; gate rows follow the order named
by ``gate_order`` which must be ``"zifo"``.
"""

import json
import os
import tempfile

import numpy as np

from .dynamics import GATE_ORDER, LstmParams, Model
from .exceptions import ModelFormatError

FORMAT_NAME = "cellprobe-model"
FORMAT_VERSION = 1


def _encode(arr):
    return [float(v).hex() for v in np.asarray(arr, dtype=float).ravel()]


def _decode(values, shape, what):
    try:
        arr = np.array([float.fromhex(v) for v in values], dtype=float)
    except (TypeError, ValueError) as err:
        raise ModelFormatError(f"{what}: bad float encoding ({err})") from None
    expected = int(np.prod(shape))
    if arr.size != expected:
        raise ModelFormatError(f"{what}: declared shape {tuple(shape)} needs {expected} values, found {arr.size}")
    return arr.reshape(shape)


def model_to_dict(model):
    return {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "task_kind": model.task_kind,
        "gate_order": GATE_ORDER,
        "layers": [
            {"layer_index": p.layer_index, "n": p.n, "m": p.m, "W": _encode(p.W), "b": _encode(p.b)}
            for p in model.layers
        ],
        "head": {
            "p": model.n_outputs,
            "weights": _encode(model.head_weights),
            "bias": _encode(model.head_bias),
        },
        "ablated": sorted([list(cell) for cell in model.ablated]),
        "provenance": model.provenance,
    }


def model_from_dict(doc):
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a cellprobe model file")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {doc.get('format_version')!r}")
    if doc.get("gate_order") != GATE_ORDER:
        raise ModelFormatError(f"unsupported gate order tag {doc.get('gate_order')!r}; expected {GATE_ORDER!r}")
    try:
        layers = []
        for k, spec in enumerate(doc["layers"]):
            n, m = int(spec["n"]), int(spec["m"])
            W = _decode(spec["W"], (4 * n, m + n), f"layer {k + 1} W")
            b = _decode(spec["b"], (4 * n,), f"layer {k + 1} b")
            layers.append(LstmParams(W, b, layer_index=int(spec.get("layer_index", k + 1))))
        head = doc["head"]
        p = int(head["p"])
        n_last = layers[-1].n if layers else 0
        Wh = _decode(head["weights"], (p, n_last), "head weights")
        bh = _decode(head["bias"], (p,), "head bias")
        ablated = frozenset(tuple(cell) for cell in doc.get("ablated", []))
        return Model(layers, Wh, bh, doc["task_kind"], dict(doc.get("provenance") or {}), ablated)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, IndexError, ValueError) as err:
        raise ModelFormatError(f"malformed model file: {err}") from err


def save_model(model, path):
    """Write ``model`` atomically to ``path``."""
    text = json.dumps(model_to_dict(model), indent=1, sort_keys=True)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path):
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"{path}: unreadable model file ({err})") from None
    return model_from_dict(doc)
