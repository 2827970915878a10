"""Synthetic lesion segmentation task trained under the adaptive controller.

The model is a per-pixel softmax classifier over five hand-made features,
trained with plain gradient descent on the fused objective. Everything is
seeded, so a :class:`RunConfig` fully determines the trace and the report.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np
from scipy import ndimage

from .bilateral import BilateralConfig, bilateral_filter
from .controller import (Controller, ControllerConfig, DecaySchedule,
                         NonFiniteLossError, Strategy, auxiliary_scale,
                         validate_priors)
from .losses import LossConfig, LossId, losses_with_grad, softmax, softmax_backward
from .metrics import METRIC_NAMES, average_reports, evaluate, hard_counts
from .pgm import write_mask, write_pgm

BASE_LOSSES = ("ce", "iou", "dice")
AUX_CHOICES = ("tversky", "focal", "cbdice", "none")
N_FEATURES = 5
LOG_DIGITS = 9


def logged(x: float) -> float:
    """Round to the precision written in trace files."""
    return float(f"{x:.{LOG_DIGITS}g}")


# -- synthetic data ----------------------------------------------------------

@dataclass
class SyntheticScene:
    image: np.ndarray
    mask: np.ndarray
    seed: int

    @property
    def lesion_fraction(self) -> float:
        return float(self.mask.mean())


def generate_scene(seed: int, size: int = 32, contrast: float = 0.3,
                   background: float = 0.35, speckle: float = 0.4,
                   area_range=(0.03, 0.30)) -> SyntheticScene:
    """One speckled image with a bright elliptical lesion.

    The ellipse area is drawn from ``area_range`` (fraction of the image) and
    redrawn until the rasterized mask lands inside that range.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(float) + 0.5
    lo, hi = area_range
    while True:
        frac = rng.uniform(lo, hi)
        aspect = rng.uniform(0.6, 1.0)
        area = frac * size * size
        a = math.sqrt(area / (math.pi * aspect))  # semi-major
        b = a * aspect
        theta = rng.uniform(0.0, math.pi)
        # half-extents of the rotated bounding box, plus one pixel margin
        ex = math.hypot(a * math.cos(theta), b * math.sin(theta)) + 1.0
        ey = math.hypot(a * math.sin(theta), b * math.cos(theta)) + 1.0
        if 2 * ex >= size or 2 * ey >= size:
            continue
        cx = rng.uniform(ex, size - ex)
        cy = rng.uniform(ey, size - ey)
        u = (xx - cx) * math.cos(theta) + (yy - cy) * math.sin(theta)
        v = -(xx - cx) * math.sin(theta) + (yy - cy) * math.cos(theta)
        mask = ((u / a) ** 2 + (v / b) ** 2 <= 1.0).astype(np.int64)
        if lo <= mask.mean() <= hi:
            break

    # gentle illumination gradient so raw intensity alone is not enough
    gx, gy = rng.uniform(-0.05, 0.05, size=2)
    base = background + gx * (xx / size - 0.5) + gy * (yy / size - 0.5)
    base = base + contrast * mask
    noise = rng.uniform(-speckle, speckle, size=base.shape)
    image = np.clip(base * (1.0 + noise), 0.0, 1.0)
    return SyntheticScene(image, mask, int(seed))


def scene_seeds(count: int, seed: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in ss.spawn(count)]


def generate_dataset(count: int, seed: int, **scene_kw) -> list[SyntheticScene]:
    if count < 1:
        raise ValueError("count must be >= 1")
    return [generate_scene(s, **scene_kw) for s in scene_seeds(count, seed)]


def export_dataset(scenes: Sequence[SyntheticScene], out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for k, sc in enumerate(scenes):
        img_path = os.path.join(out_dir, f"scene_{k}.pgm")
        mask_path = os.path.join(out_dir, f"mask_{k}.pgm")
        write_pgm(img_path, sc.image)
        write_mask(mask_path, sc.mask)
        written += [img_path, mask_path]
    return written


# -- features and model ------------------------------------------------------

def pixel_features(image, bilateral: BilateralConfig | None = None) -> np.ndarray:
    """(H*W, 5): intensity, 5x5 local mean, 5x5 local std, x, y."""
    img = np.asarray(image, dtype=float)
    if bilateral is not None:
        img = bilateral_filter(img, bilateral)
    mean = ndimage.uniform_filter(img, size=5, mode="nearest")
    sq = ndimage.uniform_filter(img * img, size=5, mode="nearest")
    std = np.sqrt(np.maximum(sq - mean * mean, 0.0))
    h, w = img.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(float)
    cols = [img, mean, std, xx / max(w - 1, 1), yy / max(h - 1, 1)]
    return np.stack([c.ravel() for c in cols], axis=1)


@dataclass
class PixelModel:
    weight: np.ndarray  # (features, classes)
    bias: np.ndarray    # (classes,)

    @classmethod
    def init(cls, n_features: int, n_classes: int, seed: int) -> "PixelModel":
        rng = np.random.default_rng(seed)
        return cls(0.01 * rng.standard_normal((n_features, n_classes)), np.zeros(n_classes))

    @property
    def n_params(self) -> int:
        return self.weight.size + self.bias.size

    def logits(self, x):
        return x @ self.weight + self.bias

    def probs(self, x):
        return softmax(self.logits(x))


# -- configuration -----------------------------------------------------------

def _parse_bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_floats(s: str) -> tuple[float, ...] | None:
    s = s.strip()
    return tuple(float(v) for v in s.split(",")) if s else None


@dataclass
class RunConfig:
    strategy: str = "variance"
    aux: str = "cbdice"
    fixed_weights: bool = False
    base_losses: tuple[str, ...] = BASE_LOSSES
    gamma0: float = 1.0
    tau: float | None = None  # None: gamma falls to 5% of gamma0 at steps/2
    lr: float = 0.5
    steps: int = 2000
    batch_size: int = 8
    seed: int = 0
    count: int = 114
    size: int = 32
    contrast: float = 0.3
    splits: tuple[float, ...] = (0.70, 0.15, 0.15)
    history: int = 64
    warmup: int = 5
    priors: tuple[float, ...] | None = None
    epsilon: float = 1e-12
    sigma_s: float = 3.0
    sigma_r: float = 0.1
    bilateral: bool = True
    focal_gamma: float = 2.0
    tversky_alpha: float = 0.7
    tversky_beta: float = 0.3
    cb_dice_weight_mode: str = "inverse"

    def __post_init__(self):
        self.strategy = Strategy(self.strategy).value
        if self.aux not in AUX_CHOICES:
            raise ValueError(f"aux must be one of {AUX_CHOICES}, got {self.aux!r}")
        self.base_losses = tuple(LossId(b).value for b in self.base_losses)
        self.splits = tuple(float(s) for s in self.splits)
        if len(self.splits) != 3 or any(s < 0 for s in self.splits) \
                or abs(sum(self.splits) - 1.0) > 1e-9:
            raise ValueError(f"splits must be three fractions summing to 1, got {self.splits}")
        if self.priors is not None:
            self.priors = tuple(validate_priors(self.priors, len(self.base_losses)))
        if self.steps < 1 or self.batch_size < 1 or self.count < 3:
            raise ValueError("steps, batch_size must be >= 1 and count >= 3")
        if self.cb_dice_weight_mode not in ("inverse", "one_minus"):
            raise ValueError(f"unknown cb_dice_weight_mode {self.cb_dice_weight_mode!r}")

    @property
    def decay_rate(self) -> float:
        if self.tau is not None:
            return float(self.tau)
        return math.log(20.0) / (self.steps / 2.0)

    @property
    def effective_priors(self) -> tuple[float, ...] | None:
        """Priors handed to the controller.

        Bayesian runs without explicit priors put half the prior mass on the
        first (pixel-wise) loss and split the rest evenly; uniform priors
        would make them identical to MAD runs.
        """
        if self.priors is not None or self.strategy != "bayesian":
            return self.priors
        n = len(self.base_losses)
        if n == 1:
            return (1.0,)
        return (0.5,) + (0.5 / (n - 1),) * (n - 1)

    @property
    def label(self) -> str:
        if self.fixed_weights:
            return "fixed" if self.aux == "none" else f"fixed+{self.aux}"
        return f"{self.strategy}+{self.aux}"

    def loss_config(self) -> LossConfig:
        from .losses import FocalConfig, TverskyConfig
        return LossConfig(focal=FocalConfig(1.0, self.focal_gamma),
                          tversky=TverskyConfig(self.tversky_alpha, self.tversky_beta),
                          cb_dice_weight_mode=self.cb_dice_weight_mode)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                v = ""
            elif isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> "RunConfig":
        return cls.from_mapping(parse_key_values(text), **overrides)

    @classmethod
    def from_mapping(cls, kv: dict[str, str], **overrides) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        args = {}
        for key, raw in kv.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            args[key] = _coerce(key, raw)
        args.update(overrides)
        return cls(**args)


_INTS = {"steps", "batch_size", "seed", "count", "size", "history", "warmup"}
_FLOATS = {"gamma0", "lr", "contrast", "epsilon", "sigma_s", "sigma_r",
           "focal_gamma", "tversky_alpha", "tversky_beta"}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key in _INTS:
        return int(raw)
    if key in _FLOATS:
        return float(raw)
    if key == "tau":
        return float(raw) if raw else None
    if key in ("fixed_weights", "bilateral"):
        return _parse_bool(raw)
    if key in ("splits", "priors"):
        return _parse_floats(raw)
    if key == "base_losses":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    return raw


def parse_key_values(text: str) -> dict[str, str]:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        kv[key.strip()] = value.strip()
    return kv


# -- trace log ---------------------------------------------------------------

class TraceFormatError(ValueError):
    pass


@dataclass
class TraceLog:
    """Per-step record of base losses, weights, auxiliary scale and total."""

    names: tuple[str, ...]
    aux_name: str | None = None
    steps: list[int] = field(default_factory=list)
    losses: list[np.ndarray] = field(default_factory=list)
    aux: list[float] = field(default_factory=list)
    weights: list[np.ndarray] = field(default_factory=list)
    gamma: list[float] = field(default_factory=list)
    total: list[float] = field(default_factory=list)

    def append(self, step, losses, weights, gamma, total, aux=None):
        if self.steps and step <= self.steps[-1]:
            raise ValueError(f"steps must increase: {step} after {self.steps[-1]}")
        self.steps.append(int(step))
        self.losses.append(np.asarray(losses, dtype=float))
        self.weights.append(np.asarray(weights, dtype=float))
        self.gamma.append(float(gamma))
        self.total.append(float(total))
        if self.aux_name is not None:
            self.aux.append(float(aux))

    def __len__(self):
        return len(self.steps)

    @property
    def loss_array(self) -> np.ndarray:
        return np.array(self.losses).reshape(len(self), len(self.names))

    @property
    def weight_array(self) -> np.ndarray:
        return np.array(self.weights).reshape(len(self), len(self.names))

    def header(self) -> list[str]:
        cols = ["step"] + [f"loss_{n}" for n in self.names]
        if self.aux_name is not None:
            cols.append(f"loss_{self.aux_name}")
        return cols + [f"w_{n}" for n in self.names] + ["gamma", "total"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        fmt = f"{{:.{LOG_DIGITS}g}}".format
        for k in range(len(self)):
            row = [str(self.steps[k])] + [fmt(v) for v in self.losses[k]]
            if self.aux_name is not None:
                row.append(fmt(self.aux[k]))
            row += [fmt(v) for v in self.weights[k]]
            row += [repr(float(self.gamma[k])), fmt(self.total[k])]  # gamma exact
            writer.writerow(row)
        return buf.getvalue()

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


@dataclass
class LossTrace:
    """Loss columns read back from a trace CSV."""

    names: tuple[str, ...]
    steps: np.ndarray
    losses: np.ndarray
    aux_name: str | None = None
    aux: np.ndarray | None = None
    weights: np.ndarray | None = None
    gamma: np.ndarray | None = None


def read_loss_trace(source) -> LossTrace:
    """Parse a trace CSV (path or text) with at least ``step`` and ``loss_*``.

    If ``w_*`` columns are present, the loss columns that have a weight are
    the base losses and a single leftover loss column is the auxiliary.
    """
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = str(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise TraceFormatError("line 1: empty trace") from None
    if not header or header[0] != "step":
        raise TraceFormatError("line 1: first column must be 'step'")
    loss_cols = [h[5:] for h in header if h.startswith("loss_")]
    w_cols = [h[2:] for h in header if h.startswith("w_")]
    if not loss_cols:
        raise TraceFormatError("line 1: no loss_<name> columns")
    if w_cols:
        missing = [n for n in w_cols if n not in loss_cols]
        if missing:
            raise TraceFormatError(f"line 1: weight columns without losses: {missing}")
        extra = [n for n in loss_cols if n not in w_cols]
        if len(extra) > 1:
            raise TraceFormatError(f"line 1: more than one auxiliary loss column: {extra}")
        names, aux_name = tuple(w_cols), (extra[0] if extra else None)
    else:
        names, aux_name = tuple(loss_cols), None
    index = {h: i for i, h in enumerate(header)}

    steps, losses, aux, weights, gamma = [], [], [], [], []
    for lineno, row in enumerate(reader, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise TraceFormatError(
                f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            step = int(row[0])
            vals = [float(row[index[f"loss_{n}"]]) for n in names]
            if aux_name is not None:
                aux.append(float(row[index[f"loss_{aux_name}"]]))
            if w_cols:
                weights.append([float(row[index[f"w_{n}"]]) for n in names])
            if "gamma" in index:
                gamma.append(float(row[index["gamma"]]))
        except ValueError as exc:
            raise TraceFormatError(f"line {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise TraceFormatError(f"line {lineno}: non-finite loss value")
        if steps and step <= steps[-1]:
            raise TraceFormatError(f"line {lineno}: step {step} does not increase")
        steps.append(step)
        losses.append(vals)
    return LossTrace(
        names=names,
        steps=np.array(steps, dtype=np.int64),
        losses=np.array(losses, dtype=float).reshape(len(steps), len(names)),
        aux_name=aux_name,
        aux=np.array(aux) if aux_name is not None else None,
        weights=np.array(weights) if w_cols else None,
        gamma=np.array(gamma) if gamma else None,
    )


def replay(trace, strategy="variance", priors=None, history: int = 64,
           warmup: int = 5, epsilon: float = 1e-12, gamma0: float = 0.0,
           tau: float = 0.0) -> TraceLog:
    """Recompute the weight trajectory offline from recorded losses."""
    if not isinstance(trace, LossTrace):
        trace = read_loss_trace(trace)
    config = ControllerConfig(strategy=strategy,
                              priors=tuple(priors) if priors is not None else None,
                              history_capacity=history, warmup_steps=warmup,
                              epsilon=epsilon)
    ctrl = Controller(len(trace.names), config, DecaySchedule(gamma0, tau))
    out = TraceLog(trace.names, trace.aux_name)
    for k, step in enumerate(trace.steps):
        aux = None if trace.aux is None else float(trace.aux[k])
        res = ctrl.step(trace.losses[k], aux, int(step))
        out.append(step, trace.losses[k], res.weights, res.gamma, res.total, aux)
    return out


# -- training ----------------------------------------------------------------

class TrainingDiverged(RuntimeError):
    def __init__(self, step: int, trace: TraceLog):
        super().__init__(f"non-finite loss at step {step}")
        self.step = step
        self.trace = trace


@dataclass
class SplitData:
    features: np.ndarray  # (scenes, pixels, F)
    masks: np.ndarray     # (scenes, pixels)


@dataclass
class RunResult:
    config: RunConfig
    trace: TraceLog
    report: dict[str, float]
    val_report: dict[str, float]
    model: PixelModel


def split_counts(count: int, splits) -> tuple[int, int, int]:
    n_train = int(round(splits[0] * count))
    n_val = int(round(splits[1] * count))
    n_train = max(1, min(n_train, count - 2))
    n_val = max(1, min(n_val, count - n_train - 1))
    return n_train, n_val, count - n_train - n_val


def prepare_data(cfg: RunConfig):
    scenes = generate_dataset(cfg.count, cfg.seed, size=cfg.size, contrast=cfg.contrast)
    bil = BilateralConfig(cfg.sigma_s, cfg.sigma_r) if cfg.bilateral else None
    feats = np.stack([pixel_features(s.image, bil) for s in scenes])
    masks = np.stack([s.mask.ravel() for s in scenes])
    n_train, n_val, _ = split_counts(cfg.count, cfg.splits)
    parts = np.split(np.arange(cfg.count), [n_train, n_train + n_val])
    return tuple(SplitData(feats[p], masks[p]) for p in parts)


def evaluate_split(model: PixelModel, data: SplitData, weight_mode="inverse") -> dict[str, float]:
    reports = []
    for x, m in zip(data.features, data.masks):
        reports.append(evaluate(hard_counts(model.probs(x), m), m, weight_mode))
    return average_reports(reports)


def fused_gradient(x, probs, grads, weights, gamma, aux_grad=None):
    """Parameter gradient of ``sum_i w_i L_i + gamma L_aux`` at fixed weights.

    ``grads`` are per-loss gradients with respect to the probabilities.
    """
    g_probs = sum(wi * gi for wi, gi in zip(weights, grads))
    if aux_grad is not None:
        g_probs = g_probs + gamma * aux_grad
    g_logits = softmax_backward(probs, g_probs)
    return x.T @ g_logits, g_logits.sum(axis=0)


def batch_indices(step: int, n_train: int, batch_size: int) -> np.ndarray:
    # fixed cyclic order: every window of n_train/gcd steps sees each scene equally
    start = (step * batch_size) % n_train
    return (start + np.arange(batch_size)) % n_train


def train(cfg: RunConfig, data=None) -> RunResult:
    train_d, val_d, test_d = data if data is not None else prepare_data(cfg)
    loss_cfg = cfg.loss_config()
    n_classes = 2
    model = PixelModel.init(N_FEATURES, n_classes, cfg.seed)
    names = cfg.base_losses
    aux_id = None if cfg.aux == "none" else cfg.aux
    schedule = DecaySchedule(cfg.gamma0, cfg.decay_rate)
    ctrl = Controller(len(names), ControllerConfig(
        strategy=cfg.strategy, priors=cfg.effective_priors, history_capacity=cfg.history,
        warmup_steps=cfg.warmup, epsilon=cfg.epsilon), schedule)
    trace = TraceLog(names, aux_id)
    uniform = np.full(len(names), 1.0 / len(names))
    n_train = len(train_d.masks)
    ids = names + ((aux_id,) if aux_id is not None else ())

    for t in range(cfg.steps):
        idx = batch_indices(t, n_train, cfg.batch_size)
        x = train_d.features[idx].reshape(-1, N_FEATURES)
        y = train_d.masks[idx].ravel()
        probs = model.probs(x)

        out = losses_with_grad(ids, probs, y, loss_cfg)
        values = [v for v, _ in out[:len(names)]]
        grads = [g for _, g in out[:len(names)]]
        aux_v = aux_g = None
        if aux_id is not None:
            aux_v, aux_g = out[-1]

        if not all(math.isfinite(v) for v in values) or \
                (aux_v is not None and not math.isfinite(aux_v)):
            raise TrainingDiverged(t, trace)

        # the controller sees exactly what the trace records, so replay is exact
        rec = [logged(v) for v in values]
        rec_aux = None if aux_v is None else logged(aux_v)
        if cfg.fixed_weights:
            w = uniform
            gamma = auxiliary_scale(schedule, t)
            total = float(np.dot(w, rec)) + (gamma * rec_aux if rec_aux is not None else 0.0)
        else:
            try:
                total, w, gamma = ctrl.step(rec, rec_aux, t)
            except NonFiniteLossError:
                raise TrainingDiverged(t, trace) from None
        trace.append(t, rec, w, gamma, total, rec_aux)

        grad_w, grad_b = fused_gradient(x, probs, grads, w, gamma, aux_g)
        model.weight -= cfg.lr * grad_w
        model.bias -= cfg.lr * grad_b

    return RunResult(cfg, trace,
                     evaluate_split(model, test_d, cfg.cb_dice_weight_mode),
                     evaluate_split(model, val_d, cfg.cb_dice_weight_mode),
                     model)


# -- multi-seed comparison ---------------------------------------------------

def default_grid(base: RunConfig) -> list[RunConfig]:
    grid = []
    for aux in ("tversky", "focal", "cbdice", "none"):
        for strat in ("variance", "mad", "bayesian"):
            grid.append(replace(base, aux=aux, strategy=strat, fixed_weights=False))
    grid.append(replace(base, aux="none", fixed_weights=True))
    return grid


@dataclass
class SummaryRow:
    label: str
    aux: str
    method: str
    mean: dict[str, float]
    std: dict[str, float]
    n: int


def compare(configs: Sequence[RunConfig], seeds: Sequence[int]) -> list[SummaryRow]:
    """Train every config on every seed; one summary row per config.

    A given seed fixes the dataset and the initial model for all configs.
    """
    seeds = list(seeds)
    results: dict[str, list[dict[str, float]]] = {}
    for seed in seeds:
        data = None
        for cfg in configs:
            cfg = replace(cfg, seed=seed)
            if data is None:
                data = prepare_data(cfg)
            results.setdefault(cfg.label, []).append(train(cfg, data).report)
    rows = []
    for cfg in configs:
        reps = results[cfg.label]
        mean = {k: float(np.mean([r[k] for r in reps])) for k in METRIC_NAMES}
        std = {k: float(np.std([r[k] for r in reps])) for k in METRIC_NAMES}
        method = "fixed" if cfg.fixed_weights else cfg.strategy
        rows.append(SummaryRow(cfg.label, cfg.aux, method, mean, std, len(reps)))
    return rows


def summary_csv(rows: Sequence[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["aux", "method", "n"]
    for k in METRIC_NAMES:
        header += [f"{k}_mean", f"{k}_std"]
    writer.writerow(header)
    for r in rows:
        line = [r.aux, r.method, str(r.n)]
        for k in METRIC_NAMES:
            line += [f"{r.mean[k]:.9g}", f"{r.std[k]:.9g}"]
        writer.writerow(line)
    return buf.getvalue()


def summary_table(rows: Sequence[SummaryRow]) -> str:
    """Plain-text table, metrics in percent as ``mean ±std``."""
    titles = {"dice": "Dice", "iou": "IoU", "f1": "F1-score", "precision": "Precision",
              "recall": "Recall", "cb_dice": "CB-Dice"}
    aux_titles = {"tversky": "Tversky Loss", "focal": "Focal Loss", "cbdice": "CB-Dice Loss",
                  "none": "No Auxiliary Loss"}
    method_titles = {"variance": "Variance", "mad": "MAD", "bayesian": "Bayesian"}
    head = ["Loss Function", "Weighting Method"] + [titles[k] for k in METRIC_NAMES]
    body = []
    for r in rows:
        aux = "Using Fixed Weights" if r.method == "fixed" else aux_titles[r.aux]
        method = "Not Used" if r.method == "fixed" else method_titles[r.method]
        body.append([aux, method] + [f"{100 * r.mean[k]:.2f} ±{100 * r.std[k]:.2f}"
                                     for k in METRIC_NAMES])
    widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
    fmt = lambda row: " | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
    lines = [fmt(head), "-+-".join("-" * w for w in widths)] + [fmt(b) for b in body]
    return "\n".join(lines) + "\n"
