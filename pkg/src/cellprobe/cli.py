"""Command line interface: ``cellprobe {train,characterize,ablate,capacity,report}``."""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import fields, replace

import numpy as np

from . import datasets
from .ablation import ablation_sweep, evaluate, impact_metric_correlation
from .capacity import capacity_sweep, fit_network, loglog_slope
from .dynamics import hidden_trajectory
from .exceptions import ModelFormatError, NumericalError
from .metrics import ProbeConfig, characterize_network
from .modelfile import load_model, save_model
from .report import (
    emit_plots,
    emit_report,
    read_ablation,
    read_capacity,
    read_characterizations,
    render_summary_table,
    summary_stats,
)
from .training import TrainConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger("cellprobe")

EXIT_INPUT = 2
EXIT_NUMERICAL = 3

DATA_DEFAULTS = {
    "task": "sine-mixture",
    "csv": None,
    "window": 20,
    "length": 400,
    "noise": 0.05,
    "images": None,
    "labels": None,
    "downsample": 1,
    "split": 0.8,
}


def load_config(path):
    """Read a TOML or JSON config with optional ``[train]``, ``[probe]`` and ``[data]`` tables."""
    if path is None:
        return {}
    with open(path, "rb") as fh:
        raw = fh.read()
    if str(path).endswith(".json"):
        return json.loads(raw)
    return tomllib.loads(raw.decode())


def _section(config, name, allowed):
    section = dict(config.get(name, {}))
    unknown = set(section) - set(allowed)
    if unknown:
        raise ValueError(f"unknown keys in [{name}] config: {sorted(unknown)}")
    return section


def _global_args(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=default)
    g.add_argument("--config", default=default, help="TOML or JSON config file")
    g.add_argument("--out", default=default, help="output directory")
    g.add_argument("--probe-T", dest="probe_T", type=int, default=default)
    g.add_argument("--step-amp", dest="step_amp", type=float, default=default)
    g.add_argument("--sine-freq", dest="sine_freq", type=float, default=default)
    g.add_argument("--sine-amp", dest="sine_amp", type=float, default=default)
    g.add_argument("--log-level", dest="log_level", default=default)


def _data_args(parser):
    g = parser.add_argument_group("data")
    g.add_argument("--task", choices=["sine-mixture", "frequency", "csv", "idx"])
    g.add_argument("--csv", help="single-column series for --task csv")
    g.add_argument("--window", type=int)
    g.add_argument("--length", type=int, help="length of the synthetic series")
    g.add_argument("--noise", type=float)
    g.add_argument("--images", help="IDX image file for --task idx")
    g.add_argument("--labels", help="IDX label file for --task idx")
    g.add_argument("--downsample", type=int)
    g.add_argument("--split", type=float, help="training fraction")


def _train_args(parser):
    g = parser.add_argument_group("training")
    g.add_argument("--cells", help="cells per layer, comma separated")
    g.add_argument("--epochs", type=int)
    g.add_argument("--lr", dest="learning_rate", type=float)
    g.add_argument("--batch-size", dest="batch_size", type=int)
    g.add_argument("--optimizer", choices=["adam", "sgd"])


def build_parser():
    parser = argparse.ArgumentParser(prog="cellprobe", description=__doc__)
    _global_args(parser, suppress=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_args(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train a model")
    _data_args(p)
    _train_args(p)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, default=0)

    p = sub.add_parser("characterize", parents=[common], help="per-cell step/sine response metrics")
    p.add_argument("--model", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plots", action="store_true")

    p = sub.add_parser("ablate", parents=[common], help="single-cell ablation sweep")
    p.add_argument("--model", required=True)
    p.add_argument("--layer", type=int, help="1-based layer to ablate (default: last)")
    p.add_argument("--plots", action="store_true")
    _data_args(p)

    p = sub.add_parser("capacity", parents=[common], help="retrain across network sizes")
    p.add_argument("--sizes", default="8,16,32,64")
    p.add_argument("--plots", action="store_true")
    _data_args(p)
    _train_args(p)

    p = sub.add_parser("report", parents=[common], help="summary table and plots from stored CSVs")
    p.add_argument("--from", dest="source", required=True, help="directory holding earlier outputs")
    p.add_argument("--name", default="network", help="row label in the summary table")
    return parser


class Settings:
    """Defaults, then config file, then command line flags."""

    def __init__(self, args):
        config = load_config(getattr(args, "config", None))
        self.args = args
        self.seed = getattr(args, "seed", None)
        if self.seed is None:
            self.seed = int(config.get("seed", 0))
        self.out = getattr(args, "out", None) or config.get("out", "out")
        self.log_level = getattr(args, "log_level", None) or config.get("log_level", "WARNING")

        probe = _section(config, "probe", [f.name for f in fields(ProbeConfig)])
        for flag, key in (("probe_T", "T"), ("step_amp", "step_amplitude"), ("sine_freq", "sine_frequency"), ("sine_amp", "sine_amplitude")):
            if getattr(args, flag, None) is not None:
                probe[key] = getattr(args, flag)
        self.probe = ProbeConfig(**probe)

        train = _section(config, "train", [f.name for f in fields(TrainConfig)] + ["cells"])
        cells = train.pop("cells", 32)
        for key in ("epochs", "learning_rate", "batch_size", "optimizer"):
            if getattr(args, key, None) is not None:
                train[key] = getattr(args, key)
        if getattr(args, "cells", None):
            cells = [int(c) for c in args.cells.split(",")]
        train["seed"] = self.seed
        self.train = TrainConfig(**train)
        self.cells = [cells] if np.isscalar(cells) else list(cells)

        self.data = dict(DATA_DEFAULTS)
        self.data.update(_section(config, "data", DATA_DEFAULTS))
        for key in DATA_DEFAULTS:
            if getattr(args, key, None) is not None:
                self.data[key] = getattr(args, key)

    def dataset(self):
        d = self.data
        if d["task"] == "sine-mixture":
            ds = datasets.sine_mixture_task(d["length"], d["window"], noise=d["noise"], seed=self.seed)
        elif d["task"] == "frequency":
            ds = datasets.frequency_task(seed=self.seed)
        elif d["task"] == "csv":
            if not d["csv"]:
                raise ValueError("--task csv needs --csv PATH")
            ds = datasets.load_series_csv(d["csv"], d["window"])
        elif d["task"] == "idx":
            if not (d["images"] and d["labels"]):
                raise ValueError("--task idx needs --images and --labels")
            ds = datasets.load_row_stacked_images(d["images"], d["labels"], d["downsample"])
        else:
            raise ValueError(f"unknown task {d['task']!r}")
        return ds.split(d["split"])


def _out(settings, name):
    os.makedirs(settings.out, exist_ok=True)
    return os.path.join(settings.out, name)


def _write_history(path, history):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss"])
        writer.writerows([k, repr(v)] for k, v in enumerate(history))


def cmd_train(s):
    train_set, test_set = s.dataset()
    every = s.args.checkpoint_every
    callback = None
    if every > 0:
        ckpt_dir = _out(s, "checkpoints")
        os.makedirs(ckpt_dir, exist_ok=True)

        def callback(epoch, current, history):
            if (epoch + 1) % every == 0:
                save_model(current, os.path.join(ckpt_dir, f"epoch_{epoch + 1:05d}.json"))

    model, history = fit_network(s.cells, train_set, s.train, callback=callback)
    provenance = {
        "seed": s.seed,
        "dataset": train_set.name,
        "train_config": s.train.to_dict(),
        "scale": train_set.scale,
    }
    save_model(replace(model, provenance=provenance), _out(s, "model.json"))
    _write_history(_out(s, "loss_history.csv"), history)
    print(f"test score: {evaluate(model, test_set.X, test_set.y):.6g}")
    return 0


def cmd_characterize(s):
    model = load_model(s.args.model)
    chars = characterize_network(model, s.probe)
    emit_report(chars, _out(s, f"characterization.{s.args.format}"), s.args.format)
    table = render_summary_table({os.path.basename(s.args.model): summary_stats(chars)})
    with open(_out(s, "summary.md"), "w") as fh:
        fh.write(table)
    print(table, end="")
    if s.args.plots:
        probe = np.repeat(s.probe.sine_signal().samples[:, None], model.n_inputs, axis=1)
        last = [c for c in chars if c.layer == model.layers[-1].layer_index]
        emit_plots(s.out, chars=last, trajectory=hidden_trajectory(model, probe))
    return 0


def cmd_ablate(s):
    model = load_model(s.args.model)
    _, test_set = s.dataset()
    records = ablation_sweep(model, test_set.X, test_set.y, s.args.layer)
    emit_report(records, _out(s, "ablation.csv"), "csv")
    chars = characterize_network(model, s.probe)
    with open(_out(s, "ablation_correlation.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "spearman"])
        for metric in ("delta_response", "amplitude", "settling_time", "correlation", "frequency"):
            rho = impact_metric_correlation(records, chars, metric) if len(records) >= 3 else float("nan")
            writer.writerow([metric, repr(rho)])
            print(f"spearman(|{metric}|, impact) = {rho:.4f}" if metric in ("delta_response", "amplitude") else f"spearman({metric}, impact) = {rho:.4f}")
    if s.args.plots:
        emit_plots(s.out, chars=chars, records=records)
    return 0


def cmd_capacity(s):
    train_set, test_set = s.dataset()
    sizes = [int(v) for v in s.args.sizes.split(",")]
    points = capacity_sweep(sizes, train_set, test_set, s.train, s.probe)
    emit_report(points, _out(s, "capacity.csv"), "csv")
    ok = [p for p in points if not p.failed]
    for p in points:
        status = "FAILED " + p.error if p.failed else f"mean |amplitude| {p.abs_amplitude[0]:.4f}, test score {p.test_score:.4g}"
        print(f"N={p.N}: {status}")
    if len(ok) >= 2:
        print(f"log-log slope of mean |amplitude| vs N: {loglog_slope(points):.3f}")
    if s.args.plots and ok:
        emit_plots(s.out, capacity=points)
    return 0


def cmd_report(s):
    src = s.args.source
    chars = records = capacity = None
    path = os.path.join(src, "characterization.csv")
    if os.path.exists(path):
        chars = read_characterizations(path)
        table = render_summary_table({s.args.name: summary_stats(chars)})
        with open(_out(s, "summary.md"), "w") as fh:
            fh.write(table)
        print(table, end="")
    path = os.path.join(src, "ablation.csv")
    if os.path.exists(path):
        records = read_ablation(path)
    path = os.path.join(src, "capacity.csv")
    if os.path.exists(path):
        capacity = read_capacity(path)
    if records and not chars:
        raise ValueError("ablation plots need characterization.csv next to ablation.csv")
    written = emit_plots(s.out, chars=chars, records=records, capacity=capacity)
    for p in written:
        print(p)
    return 0


COMMANDS = {
    "train": cmd_train,
    "characterize": cmd_characterize,
    "ablate": cmd_ablate,
    "capacity": cmd_capacity,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
        logging.basicConfig(level=settings.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](settings)
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, IndexError, TypeError, OSError, ModelFormatError, tomllib.TOMLDecodeError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
