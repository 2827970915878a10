"""Argmax-based evaluation metrics for segmentation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import class_weights

METRIC_NAMES = ("dice", "iou", "f1", "precision", "recall", "cb_dice")


@dataclass
class HardCounts:
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    tn: np.ndarray

    @property
    def n_pixels(self) -> int:
        return int(self.tp[0] + self.fp[0] + self.fn[0] + self.tn[0])


@dataclass
class MetricReport:
    """Per-class metrics plus their macro averages.

    ``cb_dice`` is a single score (class-weighted dice); ``class_weights``
    holds the weights it used.
    """

    dice: np.ndarray
    iou: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    class_weights: np.ndarray
    cb_dice: float

    def macro(self) -> dict[str, float]:
        return {
            "dice": float(self.dice.mean()),
            "iou": float(self.iou.mean()),
            "f1": float(self.f1.mean()),
            "precision": float(self.precision.mean()),
            "recall": float(self.recall.mean()),
            "cb_dice": float(self.cb_dice),
        }


def predict_labels(probs) -> np.ndarray:
    # np.argmax returns the first maximum, so ties go to the lowest class
    return np.argmax(np.asarray(probs, dtype=float), axis=1)


def hard_counts_from_labels(pred, mask, n_classes: int) -> HardCounts:
    pred = np.asarray(pred).ravel()
    mask = np.asarray(mask).ravel()
    if pred.shape != mask.shape:
        raise ValueError(f"{pred.size} predictions for {mask.size} labels")
    if mask.size and (min(pred.min(), mask.min()) < 0
                      or max(pred.max(), mask.max()) >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    conf = np.bincount(mask * n_classes + pred, minlength=n_classes**2)
    conf = conf.reshape(n_classes, n_classes)  # rows: truth, cols: prediction
    tp = np.diag(conf).copy()
    fp = conf.sum(axis=0) - tp
    fn = conf.sum(axis=1) - tp
    tn = mask.size - tp - fp - fn
    return HardCounts(tp, fp, fn, tn)


def hard_counts(probs, mask) -> HardCounts:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 2 or probs.shape[0] != np.asarray(mask).size:
        raise ValueError("probs must be (pixels, classes) matching the mask")
    return hard_counts_from_labels(predict_labels(probs), mask, probs.shape[1])


def _ratio(num, den, absent):
    # 0/0 is 1 for a class absent from both truth and prediction, 0 otherwise
    safe = np.where(den > 0, den, 1)
    return np.where(den > 0, num / safe, np.where(absent, 1.0, 0.0))


def evaluate(counts: HardCounts, mask, weight_mode: str = "inverse") -> MetricReport:
    tp, fp, fn = (np.asarray(a, dtype=float) for a in (counts.tp, counts.fp, counts.fn))
    absent = (tp + fp + fn) == 0
    dice = _ratio(2 * tp, 2 * tp + fp + fn, absent)
    iou = _ratio(tp, tp + fp + fn, absent)
    precision = _ratio(tp, tp + fp, absent)
    recall = _ratio(tp, tp + fn, absent)
    # 2PR/(P+R) and the weighted sum can land one ulp above 1
    f1 = np.minimum(_ratio(2 * precision * recall, precision + recall, absent), 1.0)
    w = class_weights(mask, tp.size, weight_mode)
    cb_dice = min(float(np.dot(w, dice)), 1.0)
    return MetricReport(dice, iou, precision, recall, f1, w, cb_dice)


def average_reports(reports) -> dict[str, float]:
    """Per-image averaging of macro metrics."""
    rows = [r.macro() for r in reports]
    if not rows:
        raise ValueError("no reports to average")
    return {k: float(np.mean([row[k] for row in rows])) for k in METRIC_NAMES}
