"""
Segmentation losses and their gradients
=======================================

Evaluates every loss on a small two-class problem and checks one
analytic gradient against finite differences.
"""

import numpy as np

from dmf.losses import LossConfig, LossId, loss_gradient, loss_value, softmax
from dmf.metrics import evaluate, hard_counts

rng = np.random.default_rng(3)

# 64 pixels, roughly 20% foreground
mask = (rng.random(64) < 0.2).astype(int)
logits = rng.standard_normal((64, 2)) + 2.0 * np.eye(2)[mask]
probs = softmax(logits)

cfg = LossConfig()
for loss in LossId:
    print(f"{loss.value:8s} {loss_value(loss, probs, mask, cfg):.5f}")

# central differences for the class-balanced dice loss
h = 1e-4
numeric = np.zeros_like(logits)
for idx in np.ndindex(*logits.shape):
    up, down = logits.copy(), logits.copy()
    up[idx] += h
    down[idx] -= h
    numeric[idx] = (loss_value("cbdice", softmax(up), mask, cfg)
                    - loss_value("cbdice", softmax(down), mask, cfg)) / (2 * h)
analytic = loss_gradient("cbdice", probs, mask, cfg)
print("cbdice gradient relative error:",
      np.abs(analytic - numeric).max() / np.abs(numeric).max())

# hard metrics use the argmax prediction
report = evaluate(hard_counts(probs, mask), mask)
for name, value in report.macro().items():
    print(f"{name:9s} {value:.4f}")
