import numpy as np
import pytest

from cellprobe.dynamics import LstmParams, Model


def random_model(rng, sizes=(4,), m=2, p=1, task_kind="regression", scale=0.8):
    layers = []
    inputs = m
    for k, n in enumerate(sizes):
        W = rng.uniform(-scale, scale, size=(4 * n, inputs + n))
        b = rng.uniform(-scale, scale, size=4 * n)
        layers.append(LstmParams(W, b, layer_index=k + 1))
        inputs = n
    head_w = rng.uniform(-1, 1, size=(p, inputs))
    head_b = rng.uniform(-1, 1, size=p)
    return Model(layers, head_w, head_b, task_kind)


def as_lists(model):
    layers = [(p.W.tolist(), p.b.tolist(), p.n) for p in model.layers]
    return layers, model.head_weights.tolist(), model.head_bias.tolist()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ---- acceptance reporting: one PASS/FAIL line per criterion ----

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    detail = getattr(item, "acceptance_detail", "")
    _acceptance.append((number, title, call.excinfo is None, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_acceptance, key=lambda r: r[0]):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
