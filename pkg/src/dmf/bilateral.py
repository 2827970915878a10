"""Edge-preserving bilateral smoothing of grayscale images."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BilateralConfig:
    sigma_s: float = 3.0
    sigma_r: float = 0.1
    radius: int | None = None

    def __post_init__(self):
        if not (self.sigma_s > 0 and self.sigma_r > 0):
            raise ValueError("sigma_s and sigma_r must be positive")
        if self.radius is not None and self.radius < 0:
            raise ValueError("radius must be >= 0")

    @property
    def window_radius(self) -> int:
        if self.radius is None:
            return int(math.ceil(2 * self.sigma_s))
        return int(self.radius)


def bilateral_filter(img, cfg: BilateralConfig = BilateralConfig()) -> np.ndarray:
    """Direct (non-approximate) bilateral filter over a square window.

    Pixels outside the image are replaced by the nearest edge pixel.
    """
    img = np.asarray(img, dtype=float)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    r = cfg.window_radius
    h, w = img.shape
    padded = np.pad(img, r, mode="edge")
    two_ss = 2.0 * cfg.sigma_s**2
    two_sr = 2.0 * cfg.sigma_r**2

    acc = np.zeros_like(img)
    norm = np.zeros_like(img)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            neigh = padded[r + dy:r + dy + h, r + dx:r + dx + w]
            weight = math.exp(-(dx * dx + dy * dy) / two_ss) * np.exp(-((img - neigh) ** 2) / two_sr)
            acc += weight * neigh
            norm += weight
    return acc / norm


def gaussian_filter(img, sigma_s: float, radius: int | None = None) -> np.ndarray:
    """Spatial-only Gaussian over the same window and border rule."""
    img = np.asarray(img, dtype=float)
    r = int(math.ceil(2 * sigma_s)) if radius is None else int(radius)
    h, w = img.shape
    padded = np.pad(img, r, mode="edge")
    acc = np.zeros_like(img)
    norm = 0.0
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            k = math.exp(-(dx * dx + dy * dy) / (2.0 * sigma_s**2))
            acc += k * padded[r + dy:r + dy + h, r + dx:r + dx + w]
            norm += k
    return acc / norm
