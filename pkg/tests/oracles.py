"""Straight-line reference implementations used as independent test oracles.

Plain Python loops and ``math`` only, no shared code with the package.
"""

import math


def logistic(a):
    return 1.0 / (1.0 + math.exp(-a)) if a >= 0 else math.exp(a) / (1.0 + math.exp(a))


def lstm_step(W, b, c_prev, y_prev, x):
    n = len(c_prev)
    v = list(x) + list(y_prev)
    a = [sum(W[r][j] * v[j] for j in range(len(v))) + b[r] for r in range(4 * n)]
    c, y = [], []
    for k in range(n):
        z = math.tanh(a[k])
        i = logistic(a[n + k])
        f = logistic(a[2 * n + k])
        o = logistic(a[3 * n + k])
        ck = z * i + f * c_prev[k]
        c.append(ck)
        y.append(o * math.tanh(ck))
    return c, y


def lstm_rollout(W, b, xs, n, keep=None):
    c, y = [0.0] * n, [0.0] * n
    out = []
    for x in xs:
        c, y = lstm_step(W, b, c, y, x)
        if keep is not None:
            y = [yk * kk for yk, kk in zip(y, keep)]
        out.append((c, y))
    return out


def network_predict(layers, head_w, head_b, xs, masks=None):
    """``layers`` is a list of (W, b, n) with nested-list weights."""
    seq = [list(x) for x in xs]
    for k, (W, b, n) in enumerate(layers):
        keep = masks[k] if masks else None
        seq = [y for _, y in lstm_rollout(W, b, seq, n, keep)]
    last = seq[-1]
    return [sum(hw[j] * last[j] for j in range(len(last))) + hb for hw, hb in zip(head_w, head_b)]


def dft_power(y):
    T = len(y)
    mu = sum(y) / T
    out = []
    for k in range(1, T // 2 + 1):
        re = sum((y[t] - mu) * math.cos(2 * math.pi * k * t / T) for t in range(T))
        im = -sum((y[t] - mu) * math.sin(2 * math.pi * k * t / T) for t in range(T))
        out.append((k / T, (re * re + im * im) / T))
    return out


def settling_scan(post, final, delta, band=0.9):
    """Smallest offset from which every later sample stays inside the band."""
    tol = (1 - band) * abs(delta)
    for start in range(len(post)):
        if all(abs(v - final) <= tol for v in post[start:]):
            return start
    return len(post)


def centered_dot(x, y):
    mx = sum(x) / len(x)
    my = sum(y) / len(y)
    total = 0.0
    for a, b in zip(x, y):
        total += (a - mx) * (b - my)
    return total


def spearman_no_ties(a, b):
    n = len(a)
    ra = {i: r for r, i in enumerate(sorted(range(n), key=lambda i: a[i]))}
    rb = {i: r for r, i in enumerate(sorted(range(n), key=lambda i: b[i]))}
    d2 = sum((ra[i] - rb[i]) ** 2 for i in range(n))
    return 1 - 6 * d2 / (n * (n * n - 1))
