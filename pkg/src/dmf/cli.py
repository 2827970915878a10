"""``dmf`` command line: train, replay, filter, gen-data, eval, compare.

Exit codes: 0 success, 1 usage error, 2 runtime or data error. Errors go
to stderr prefixed with ``dmf: error:``.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import replace

import numpy as np

from .bilateral import BilateralConfig, bilateral_filter
from .controller import validate_priors
from .harness import (RunConfig, TrainingDiverged, compare, default_grid,
                      export_dataset, generate_dataset, replay, summary_csv,
                      summary_table)
from .metrics import METRIC_NAMES, evaluate, hard_counts_from_labels
from .pgm import read_mask, read_pgm, write_pgm

PREFIX = "dmf: error:"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _priors(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
        validate_priors(vals)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return vals


def _positive(kind):
    def parse(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def _add_controller_flags(p, with_aux=True):
    p.add_argument("--strategy", choices=["variance", "mad", "bayesian"])
    p.add_argument("--priors", type=_priors, help="comma-separated simplex, e.g. 0.5,0.25,0.25")
    p.add_argument("--history", type=int, help="loss-history window length")
    p.add_argument("--warmup", type=int)
    p.add_argument("--gamma0", type=float)
    p.add_argument("--tau", type=float)
    if with_aux:
        p.add_argument("--aux", choices=["tversky", "focal", "cbdice", "none"])
        p.add_argument("--fixed-weights", action="store_true", default=None)


def _add_run_flags(p):
    _add_controller_flags(p)
    p.add_argument("--config", help="key=value run configuration file")
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--count", type=int, help="number of synthetic scenes")
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma-s", type=_positive(float))
    p.add_argument("--sigma-r", type=_positive(float))
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("train", help="train on synthetic scenes, write trace and report")
    _add_run_flags(p)

    p = sub.add_parser("replay", help="recompute weights from a recorded loss trace")
    p.add_argument("trace", help="trace CSV with step and loss_<name> columns")
    _add_controller_flags(p, with_aux=False)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("filter", help="bilateral-filter a PGM image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma-s", type=_positive(float), default=3.0)
    p.add_argument("--sigma-r", type=_positive(float), default=0.1)
    p.add_argument("--radius", type=int)

    p = sub.add_parser("gen-data", help="write a synthetic dataset as PGM pairs")
    p.add_argument("--count", type=_positive(int), default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=_positive(int), default=32)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("eval", help="metrics from prediction/mask PGM pairs")
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--mask", nargs="+", required=True)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--out", help="write metrics.csv here instead of stdout")

    p = sub.add_parser("compare", help="multi-seed DMF vs fixed-weights table")
    _add_run_flags(p)
    p.add_argument("--seeds", type=_positive(int), default=10, help="number of seeds")
    p.add_argument("--configs", help="comma-separated labels such as variance+cbdice,fixed")
    return parser


_RUN_KEYS = {
    "strategy": "strategy", "aux": "aux", "fixed_weights": "fixed_weights",
    "gamma0": "gamma0", "tau": "tau", "history": "history", "warmup": "warmup",
    "priors": "priors", "steps": "steps", "lr": "lr", "batch_size": "batch_size",
    "count": "count", "seed": "seed", "sigma_s": "sigma_s", "sigma_r": "sigma_r",
}


def _run_config(args) -> RunConfig:
    overrides = {key: getattr(args, attr) for attr, key in _RUN_KEYS.items()
                 if getattr(args, attr, None) is not None}
    if args.config:
        with open(args.config) as fh:
            return RunConfig.from_text(fh.read(), **overrides)
    return RunConfig(**overrides)


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name"] + list(METRIC_NAMES))
    for name, rep in rows:
        w.writerow([name] + [f"{rep[k]:.9g}" for k in METRIC_NAMES])
    return buf.getvalue()


def cmd_train(args):
    from .harness import train
    cfg = _run_config(args)
    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "config.txt"), cfg.to_text())
    try:
        result = train(cfg)
    except TrainingDiverged as exc:
        exc.trace.write(os.path.join(args.out, "trace.csv"))
        raise
    result.trace.write(os.path.join(args.out, "trace.csv"))
    _write(os.path.join(args.out, "report.csv"),
           _report_csv([("test", result.report), ("val", result.val_report)]))
    print(_report_csv([("test", result.report)]), end="")


def cmd_replay(args):
    kw = {}
    for name in ("history", "warmup", "gamma0", "tau"):
        if getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    log = replay(args.trace, strategy=args.strategy or "variance", priors=args.priors, **kw)
    os.makedirs(args.out, exist_ok=True)
    log.write(os.path.join(args.out, "replay.csv"))


def cmd_filter(args):
    img = read_pgm(args.input)
    cfg = BilateralConfig(args.sigma_s, args.sigma_r, args.radius)
    write_pgm(args.output, bilateral_filter(img, cfg))


def cmd_gen_data(args):
    scenes = generate_dataset(args.count, args.seed, size=args.size)
    export_dataset(scenes, args.out)


def cmd_eval(args):
    if len(args.pred) != len(args.mask):
        raise UsageError(f"{len(args.pred)} predictions for {len(args.mask)} masks")
    rows = []
    for pred_path, mask_path in zip(args.pred, args.mask):
        pred = read_mask(pred_path, args.classes)
        mask = read_mask(mask_path, args.classes)
        if pred.shape != mask.shape:
            raise ValueError(f"{pred_path}: shape {pred.shape} does not match {mask_path}")
        rep = evaluate(hard_counts_from_labels(pred, mask, args.classes), mask)
        rows.append((os.path.basename(pred_path), rep.macro()))
    mean = {k: float(np.mean([r[k] for _, r in rows])) for k in METRIC_NAMES}
    text = _report_csv(rows + [("mean", mean)])
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write(os.path.join(args.out, "metrics.csv"), text)
    else:
        print(text, end="")


def cmd_compare(args):
    base = _run_config(args)
    grid = default_grid(base)
    if args.configs:
        wanted = [s.strip() for s in args.configs.split(",") if s.strip()]
        by_label = {c.label: c for c in grid}
        for label in wanted:
            if label not in by_label:
                by_label[label] = _config_from_label(base, label)
        grid = [by_label[label] for label in wanted]
    first = base.seed
    rows = compare(grid, range(first, first + args.seeds))
    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "summary.csv"), summary_csv(rows))
    table = summary_table(rows)
    _write(os.path.join(args.out, "summary.txt"), table)
    print(table, end="")


def _config_from_label(base: RunConfig, label: str) -> RunConfig:
    head, _, aux = label.partition("+")
    if head == "fixed":
        return replace(base, fixed_weights=True, aux=aux or "none")
    if not aux:
        raise UsageError(f"bad config label {label!r}; expected strategy+aux or fixed")
    try:
        return replace(base, strategy=head, aux=aux, fixed_weights=False)
    except ValueError as exc:
        raise UsageError(f"bad config label {label!r}: {exc}") from None


COMMANDS = {"train": cmd_train, "replay": cmd_replay, "filter": cmd_filter,
            "gen-data": cmd_gen_data, "eval": cmd_eval, "compare": cmd_compare}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"{PREFIX} {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"{PREFIX} {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
