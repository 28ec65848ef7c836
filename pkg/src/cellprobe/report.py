"""CSV/JSON reports, Table-1 style summaries and static SVG plots."""

import csv
import json
import os

import numpy as np

from .ablation import AblationRecord
from .capacity import CapacityPoint
from .metrics import METRIC_NAMES, CellCharacterization, SineMetrics, StepMetrics, format_summary, summarize

CHAR_COLUMNS = ["cell", "settle_time", "delta", "amplitude", "correlation", "frequency"]
ABLATION_COLUMNS = ["cell", "baseline", "ablated", "impact"]
# metric name -> (CSV column, table heading)
METRIC_COLUMNS = {
    "settling_time": ("settle_time", "Settle Time"),
    "delta_response": ("delta", "Output Change"),
    "amplitude": ("amplitude", "Amplitude"),
    "correlation": ("correlation", "Correlation"),
    "frequency": ("frequency", "Frequency"),
}
SMOOTHING_WINDOW = 9


def _num(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _cell_label(layer, cell, multilayer):
    return f"{layer}:{cell}" if multilayer else str(cell)


def characterization_rows(chars):
    multilayer = len({c.layer for c in chars}) > 1
    return [
        {
            "cell": _cell_label(c.layer, c.cell_index, multilayer),
            "settle_time": c.step.settling_time,
            "delta": c.step.delta_response,
            "amplitude": c.sine.amplitude,
            "correlation": c.sine.correlation,
            "frequency": c.sine.frequency,
        }
        for c in chars
    ]


def ablation_rows(records):
    multilayer = len({r.layer for r in records}) > 1
    return [
        {
            "cell": _cell_label(r.layer, r.cell_index, multilayer),
            "baseline": r.baseline_score,
            "ablated": r.ablated_score,
            "impact": r.impact,
        }
        for r in records
    ]


def capacity_columns():
    cols = ["N", "status", "test_score", "abs_amplitude_mean", "abs_amplitude_std"]
    for name in METRIC_NAMES:
        col = METRIC_COLUMNS[name][0]
        cols += [f"{col}_mean", f"{col}_std"]
    return cols


def capacity_rows(points):
    rows = []
    for p in points:
        row = {
            "N": p.N,
            "status": "failed" if p.failed else "ok",
            "test_score": p.test_score,
            "abs_amplitude_mean": p.abs_amplitude[0],
            "abs_amplitude_std": p.abs_amplitude[1],
        }
        for name in METRIC_NAMES:
            col = METRIC_COLUMNS[name][0]
            mean, std = p.stats.get(name, (np.nan, np.nan))
            row[f"{col}_mean"], row[f"{col}_std"] = mean, std
        rows.append(row)
    return rows


def _tabulate(results):
    first = results[0]
    if isinstance(first, CellCharacterization):
        return CHAR_COLUMNS, characterization_rows(results)
    if isinstance(first, AblationRecord):
        return ABLATION_COLUMNS, ablation_rows(results)
    if isinstance(first, CapacityPoint):
        return capacity_columns(), capacity_rows(results)
    raise TypeError(f"don't know how to report {type(first).__name__}")


def emit_report(results, path, format=None):
    """Write characterizations, ablation records or capacity points as CSV or JSON.

    ``format`` defaults to the file extension.
    """
    results = list(results)
    if not results:
        raise ValueError("nothing to report: results are empty")
    format = format or os.path.splitext(str(path))[1].lstrip(".").lower() or "csv"
    if format not in ("csv", "json"):
        raise ValueError(f"report format must be 'csv' or 'json', got {format!r}")
    columns, rows = _tabulate(results)
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([row[c] if isinstance(row[c], str) else _num(row[c]) for c in columns])
    else:
        clean = [{k: (v if isinstance(v, str) else _json_num(v)) for k, v in row.items()} for row in rows]
        with open(path, "w") as fh:
            json.dump(clean, fh, indent=1)
            fh.write("\n")
    return path


def _json_num(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if np.isfinite(v) else None


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_characterizations(path):
    """Rebuild characterizations from a per-cell CSV (initial/final responses are not stored)."""
    rows = read_csv(path)
    if not rows or list(rows[0]) != CHAR_COLUMNS:
        raise ValueError(f"{path}: expected columns {CHAR_COLUMNS}")
    chars = []
    for row in rows:
        layer, _, cell = row["cell"].rpartition(":")
        step = StepMetrics(np.nan, np.nan, float(row["delta"]), int(row["settle_time"]))
        sine = SineMetrics(float(row["amplitude"]), float(row["frequency"]), float(row["correlation"]))
        chars.append(CellCharacterization(int(cell), step, sine, int(layer) if layer else 1))
    return chars


def read_ablation(path):
    rows = read_csv(path)
    if not rows or list(rows[0]) != ABLATION_COLUMNS:
        raise ValueError(f"{path}: expected columns {ABLATION_COLUMNS}")
    out = []
    for row in rows:
        layer, _, cell = row["cell"].rpartition(":")
        out.append(AblationRecord(int(cell), float(row["baseline"]), float(row["ablated"]), int(layer) if layer else 1))
    return out


def read_capacity(path):
    points = []
    for row in read_csv(path):
        stats = {
            name: (float(row[f"{METRIC_COLUMNS[name][0]}_mean"]), float(row[f"{METRIC_COLUMNS[name][0]}_std"]))
            for name in METRIC_NAMES
        }
        points.append(
            CapacityPoint(
                int(row["N"]),
                stats,
                (float(row["abs_amplitude_mean"]), float(row["abs_amplitude_std"])),
                float(row["test_score"]),
                row["status"] != "ok",
            )
        )
    return points


def summary_stats(chars):
    """Metric name -> (mean, population std) over all cells."""
    if not chars:
        raise ValueError("no characterizations to summarize")
    return {name: summarize([c.value(name) for c in chars]) for name in METRIC_NAMES}


def render_summary_table(named_stats):
    """Markdown table with one "mean ± std" row per network, in Table-1 layout."""
    names = list(named_stats)
    if not names:
        raise ValueError("no rows to render")
    header = ["Network"] + [METRIC_COLUMNS[m][1] for m in METRIC_NAMES]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for name in names:
        stats = named_stats[name]
        cells = [format_summary(*stats[m]) for m in METRIC_NAMES]
        lines.append("| " + " | ".join([name] + cells) + " |")
    lines.append("")
    lines.append("Entries are mean ± std (population std over cells); frequency in cycles/step.")
    return "\n".join(lines) + "\n"


def moving_average(values, window=SMOOTHING_WINDOW):
    """Centered moving mean and std with a shrinking window at the edges."""
    values = np.asarray(values, dtype=float)
    half = window // 2
    mean = np.empty_like(values)
    std = np.empty_like(values)
    for k in range(len(values)):
        seg = values[max(0, k - half) : k + half + 1]
        mean[k], std[k] = seg.mean(), seg.std()
    return mean, std


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "cellprobe"
    plt.rcParams["svg.fonttype"] = "path"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def plot_ranked_metrics(chars, path):
    """One panel per metric with cells sorted by that metric."""
    plt = _pyplot()
    fig, axes = plt.subplots(1, len(METRIC_NAMES), figsize=(3.2 * len(METRIC_NAMES), 3.0))
    for ax, name in zip(axes, METRIC_NAMES):
        values = np.sort([c.value(name) for c in chars], kind="stable")
        ax.bar(np.arange(1, len(values) + 1), values, width=1.0, color="tab:blue")
        ax.set_title(METRIC_COLUMNS[name][1])
        ax.set_xlabel("ranked cell")
    fig.tight_layout()
    return _save(fig, path)


def plot_heatmap(trajectory, path, order=None, title="cell output"):
    """Cell outputs over time for one input sequence, rows in ``order``."""
    plt = _pyplot()
    traj = np.asarray(trajectory, dtype=float)
    if order is not None:
        traj = traj[:, list(order)]
    fig, ax = plt.subplots(figsize=(8, 4))
    im = ax.imshow(traj.T, aspect="auto", cmap="RdBu_r", vmin=-1, vmax=1, interpolation="nearest")
    ax.set_xlabel("time step")
    ax.set_ylabel("cell (ranked)")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    return _save(fig, path)


def plot_ablation(records, chars, metric, path, window=SMOOTHING_WINDOW):
    """Ablation impact against cells ranked by ``metric``, with the metric overlaid."""
    plt = _pyplot()
    by_cell = {(c.layer, c.cell_index): c.value(metric) for c in chars}
    pairs = sorted(
        ((by_cell[(r.layer, r.cell_index)], r.cell_index, r.impact) for r in records), key=lambda p: (p[0], p[1])
    )
    values = np.array([p[0] for p in pairs])
    impact = np.array([p[2] for p in pairs])
    mean, std = moving_average(impact, window)
    x = np.arange(1, len(pairs) + 1)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(x, impact, ".", color="tab:blue", alpha=0.4)
    ax.plot(x, mean, color="tab:blue", label=f"impact, moving average (window {window})")
    ax.fill_between(x, mean - std, mean + std, color="tab:blue", alpha=0.2)
    ax.set_xlabel(f"cell ranked by {METRIC_COLUMNS[metric][1].lower()}")
    ax.set_ylabel("ablation impact")
    twin = ax.twinx()
    twin.plot(x, values, color="gray", label=METRIC_COLUMNS[metric][1])
    twin.set_ylabel(METRIC_COLUMNS[metric][1])
    ax.legend(loc="upper left", fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_capacity(points, path):
    """Mean ± std of every metric against network size."""
    plt = _pyplot()
    ok = [p for p in points if not p.failed]
    N = np.array([p.N for p in ok])
    panels = list(METRIC_NAMES) + ["abs_amplitude"]
    fig, axes = plt.subplots(1, len(panels), figsize=(3.0 * len(panels), 3.0))
    for ax, name in zip(axes, panels):
        if name == "abs_amplitude":
            stats = np.array([p.abs_amplitude for p in ok])
            ax.set_title("|Amplitude|")
        else:
            stats = np.array([p.stats[name] for p in ok])
            ax.set_title(METRIC_COLUMNS[name][1])
        ax.errorbar(N, stats[:, 0], yerr=stats[:, 1], marker="o", capsize=3)
        ax.set_xscale("log", base=2)
        ax.set_xlabel("cells N")
    fig.tight_layout()
    return _save(fig, path)


def emit_plots(directory, chars=None, records=None, capacity=None, trajectory=None):
    """Write every plot the given results support; returns the written paths."""
    if not any(x is not None and len(x) for x in (chars, records, capacity)):
        raise ValueError("nothing to plot: results are empty")
    os.makedirs(directory, exist_ok=True)
    written = []
    if chars:
        written.append(plot_ranked_metrics(chars, os.path.join(directory, "ranked_metrics.svg")))
        if trajectory is not None:
            order = [c.cell_index for c in sorted(chars, key=lambda c: (c.step.settling_time, c.cell_index))]
            written.append(plot_heatmap(trajectory, os.path.join(directory, "heatmap.svg"), order))
    if records and chars:
        for metric in ("delta_response", "amplitude"):
            written.append(plot_ablation(records, chars, metric, os.path.join(directory, f"ablation_{metric}.svg")))
    if capacity:
        written.append(plot_capacity(capacity, os.path.join(directory, "capacity.svg")))
    return written
