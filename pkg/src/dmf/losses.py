"""Segmentation losses on per-pixel class probabilities.

Every loss takes ``probs`` (pixels x classes, rows on the simplex) and an
integer ``mask`` (pixels,). Overlap losses are built from soft confusion
counts so they stay differentiable. Each loss has a companion that returns
``(value, grad)`` where ``grad`` is taken with respect to ``probs``;
:func:`loss_gradient` chains that through the softmax to get the gradient
with respect to the logits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

CLIP = 1e-7
SMOOTH = 1e-6


class LossId(str, Enum):
    CE = "ce"
    IOU = "iou"
    DICE = "dice"
    FOCAL = "focal"
    TVERSKY = "tversky"
    CBDICE = "cbdice"


@dataclass(frozen=True)
class FocalConfig:
    alpha: tuple[float, ...] | float = 1.0
    gamma: float = 2.0


@dataclass(frozen=True)
class TverskyConfig:
    alpha: float = 0.7
    beta: float = 0.3


@dataclass(frozen=True)
class LossConfig:
    """Knobs for every loss in the suite, passed around as one object."""

    focal: FocalConfig = field(default_factory=FocalConfig)
    tversky: TverskyConfig = field(default_factory=TverskyConfig)
    cb_dice_weight_mode: str = "inverse"
    smooth: float = SMOOTH


@dataclass
class SoftCounts:
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.tp.size


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(probs: np.ndarray, grad_probs: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product of the row-wise softmax."""
    inner = np.sum(probs * grad_probs, axis=-1, keepdims=True)
    return probs * (grad_probs - inner)


def one_hot(mask, n_classes: int) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.size and (mask.min() < 0 or mask.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    out = np.zeros((mask.size, n_classes))
    out[np.arange(mask.size), mask.ravel()] = 1.0
    return out


def _check(probs, mask):
    probs = np.asarray(probs, dtype=float)
    mask = np.asarray(mask).ravel()
    if probs.ndim != 2:
        raise ValueError(f"probs must be (pixels, classes), got shape {probs.shape}")
    if probs.shape[0] != mask.size:
        raise ValueError(f"{probs.shape[0]} probability rows for {mask.size} labels")
    return probs, mask


def soft_counts(probs, mask) -> SoftCounts:
    probs, mask = _check(probs, mask)
    c = probs.shape[1]
    if mask.size and (mask.min() < 0 or mask.max() >= c):
        raise ValueError(f"labels must lie in [0, {c})")
    tp = np.bincount(mask, weights=probs[np.arange(mask.size), mask], minlength=c)
    fp = probs.sum(axis=0) - tp
    fn = np.bincount(mask, minlength=c) - tp
    return SoftCounts(tp, fp, fn)


def tversky_index(counts: SoftCounts, alpha: float, beta: float,
                  smooth: float = SMOOTH) -> np.ndarray:
    """Per-class ``TP / (TP + alpha FP + beta FN + smooth)``.

    Dice is the alpha = beta = 1/2 member and IoU the alpha = beta = 1 member.
    A class with no truth and no predicted mass scores 1.
    """
    return _tversky_parts(counts, alpha, beta, smooth)[0]


def _tversky_parts(counts, alpha, beta, smooth):
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    raw = tp + alpha * fp + beta * fn
    absent = raw == 0
    den = raw + smooth
    score = np.where(absent, 1.0, tp / den)
    d_tp = np.where(absent, 0.0, (den - tp) / den**2)
    d_fp = np.where(absent, 0.0, -alpha * tp / den**2)
    d_fn = np.where(absent, 0.0, -beta * tp / den**2)
    return score, d_tp, d_fp, d_fn


def _weighted_tversky(probs, mask, weights, alpha, beta, smooth, counts=None):
    """``1 - sum_c weights_c T_c`` and its gradient w.r.t. probs."""
    if counts is None:
        probs, mask = _check(probs, mask)
        counts = soft_counts(probs, mask)
    score, d_tp, d_fp, d_fn = _tversky_parts(counts, alpha, beta, smooth)
    value = 1.0 - float(np.dot(weights, score))
    # dTP/dp = y, dFP/dp = 1 - y, dFN/dp = -y
    grad = np.empty(probs.shape)
    grad[:] = -weights * d_fp
    on_label = -weights * (d_tp - d_fn - d_fp)
    grad[np.arange(mask.size), mask] += on_label[mask]
    return value, grad


# -- pixel-wise losses -------------------------------------------------------

def _true_class_probs(probs, mask):
    return probs[np.arange(mask.size), mask]


def cross_entropy(probs, mask) -> float:
    return cross_entropy_with_grad(probs, mask)[0]


def cross_entropy_with_grad(probs, mask):
    return focal_with_grad(probs, mask, FocalConfig(alpha=1.0, gamma=0.0))


def _alpha_per_pixel(alpha, mask, n_classes):
    a = np.asarray(alpha, dtype=float)
    if a.ndim == 0:
        return np.full(mask.size, float(a))
    if a.size != n_classes:
        raise ValueError(f"focal alpha needs {n_classes} entries, got {a.size}")
    return a[mask]


def focal_loss(probs, mask, cfg: FocalConfig = FocalConfig()) -> float:
    return focal_with_grad(probs, mask, cfg)[0]


def focal_with_grad(probs, mask, cfg: FocalConfig = FocalConfig()):
    probs, mask = _check(probs, mask)
    n, c = probs.shape
    idx = np.arange(n)
    raw = probs[idx, mask]
    p = np.clip(raw, CLIP, 1.0 - CLIP)
    alpha = _alpha_per_pixel(cfg.alpha, mask, c)
    gamma = float(cfg.gamma)

    log_p = np.log(p)
    if gamma == 0.0:
        value = float(np.mean(-alpha * log_p))
        d_p = -alpha / p
    else:
        q = 1.0 - p
        mod = q**gamma
        value = float(np.mean(-alpha * mod * log_p))
        d_p = -alpha * (mod / p - gamma * q ** (gamma - 1.0) * log_p)
    # clipped entries are flat
    d_p = np.where((raw > CLIP) & (raw < 1.0 - CLIP), d_p, 0.0)

    grad = np.zeros_like(probs)
    grad[idx, mask] = d_p / n
    return value, grad


# -- overlap losses ----------------------------------------------------------

def _uniform_class_weights(c):
    return np.full(c, 1.0 / c)


def mean_iou_loss(counts: SoftCounts, smooth: float = SMOOTH) -> float:
    return 1.0 - float(np.mean(tversky_index(counts, 1.0, 1.0, smooth)))


def mean_dice_loss(counts: SoftCounts, smooth: float = SMOOTH) -> float:
    return 1.0 - float(np.mean(tversky_index(counts, 0.5, 0.5, smooth)))


def tversky_loss(counts: SoftCounts, cfg: TverskyConfig = TverskyConfig(),
                 smooth: float = SMOOTH) -> float:
    return 1.0 - float(np.mean(tversky_index(counts, cfg.alpha, cfg.beta, smooth)))


def class_weights(mask, n_classes: int | None = None, mode: str = "inverse") -> np.ndarray:
    """Class weights on the simplex that favour rare classes.

    ``inverse`` weights each present class by the inverse of its pixel
    ratio; ``one_minus`` uses ``1 - ratio``. Classes with no pixels get 0.
    """
    mask = np.asarray(mask).ravel()
    if mask.size == 0:
        raise ValueError("empty mask")
    if n_classes is None:
        n_classes = int(mask.max()) + 1
    counts = np.bincount(mask, minlength=n_classes).astype(float)
    if counts.size > n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes})")
    present = counts > 0
    ratio = counts / mask.size
    raw = np.zeros(n_classes)
    if mode == "inverse":
        raw[present] = 1.0 / ratio[present]
    elif mode == "one_minus":
        raw[present] = 1.0 - ratio[present]
        if raw.sum() == 0:  # a single class fills the mask
            raw[present] = 1.0
    else:
        raise ValueError(f"unknown class weight mode {mode!r}")
    return raw / raw.sum()


def cb_dice_score(counts: SoftCounts, weights, smooth: float = SMOOTH) -> float:
    return float(np.dot(weights, tversky_index(counts, 0.5, 0.5, smooth)))


def cb_dice_loss(counts: SoftCounts, weights, smooth: float = SMOOTH) -> float:
    return 1.0 - cb_dice_score(counts, weights, smooth)


# -- dispatch ----------------------------------------------------------------

def loss_with_grad(loss_id, probs, mask, cfg: LossConfig = LossConfig()):
    """Return ``(value, d value / d probs)`` for one loss of the suite."""
    return losses_with_grad([loss_id], probs, mask, cfg)[0]


def losses_with_grad(loss_ids, probs, mask, cfg: LossConfig = LossConfig()):
    """Several losses on the same batch, sharing the soft counts."""
    probs, mask = _check(probs, mask)
    c = probs.shape[1]
    counts = None
    out = []
    for loss_id in loss_ids:
        loss_id = LossId(loss_id)
        if loss_id is LossId.CE:
            out.append(cross_entropy_with_grad(probs, mask))
            continue
        if loss_id is LossId.FOCAL:
            out.append(focal_with_grad(probs, mask, cfg.focal))
            continue
        if counts is None:
            counts = soft_counts(probs, mask)
        w = _uniform_class_weights(c)
        if loss_id is LossId.IOU:
            a = b = 1.0
        elif loss_id is LossId.DICE:
            a = b = 0.5
        elif loss_id is LossId.TVERSKY:
            a, b = cfg.tversky.alpha, cfg.tversky.beta
        else:
            a = b = 0.5
            w = class_weights(mask, c, cfg.cb_dice_weight_mode)
        out.append(_weighted_tversky(probs, mask, w, a, b, cfg.smooth, counts))
    return out


def loss_value(loss_id, probs, mask, cfg: LossConfig = LossConfig()) -> float:
    return loss_with_grad(loss_id, probs, mask, cfg)[0]


def loss_gradient(loss_id, probs, mask, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """Gradient of a loss with respect to the pre-softmax logits."""
    probs = np.asarray(probs, dtype=float)
    _, g = loss_with_grad(loss_id, probs, mask, cfg)
    return softmax_backward(probs, g)
