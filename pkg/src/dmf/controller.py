"""Adaptive multi-loss weighting driven by loss-history statistics.

A :class:`Controller` keeps one bounded :class:`LossHistory` per base loss.
Every step it pushes the new loss values, normalizes each history
(symmetric log followed by min-max), turns the normalized histories into a
weight vector on the simplex with one of three strategies and fuses the
losses::

    total = sum_i w_i * L_i + gamma(t) * L_aux,    gamma(t) = gamma0 * exp(-tau * t)

The weights are plain floats recomputed from scalar history, so nothing
downstream ever differentiates through them.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

DEFAULT_CAPACITY = 64
DEFAULT_WARMUP = 5
DEFAULT_EPSILON = 1e-12
SIMPLEX_TOL = 1e-9


class NonFiniteLossError(ValueError):
    """A loss value was NaN or infinite (training has diverged)."""


class Strategy(str, Enum):
    VARIANCE = "variance"
    MAD = "mad"
    BAYESIAN = "bayesian"


class LossHistory:
    """FIFO window of the most recent loss values of one loss function."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY, values: Iterable[float] = ()):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self._values: deque[float] = deque(maxlen=self.capacity)
        for v in values:
            self.push(v)

    def push(self, value: float) -> "LossHistory":
        value = float(value)
        if not math.isfinite(value):
            raise NonFiniteLossError(f"non-finite loss value {value!r}")
        self._values.append(value)
        return self

    @property
    def values(self) -> np.ndarray:
        return np.fromiter(self._values, dtype=float, count=len(self._values))

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self):
        return iter(self._values)

    def __repr__(self) -> str:
        return f"LossHistory(capacity={self.capacity}, values={list(self._values)})"


def push_loss(history: LossHistory, value: float) -> LossHistory:
    return history.push(value)


@dataclass(frozen=True)
class DecaySchedule:
    """Exponential decay of the auxiliary-loss coefficient."""

    gamma0: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        if self.gamma0 < 0 or self.tau < 0:
            raise ValueError("gamma0 and tau must be non-negative")

    def __call__(self, t: float) -> float:
        return auxiliary_scale(self, t)


def auxiliary_scale(schedule: DecaySchedule, t: float) -> float:
    if t < 0:
        raise ValueError(f"step index must be >= 0, got {t}")
    return schedule.gamma0 * math.exp(-schedule.tau * t)


# -- normalization -----------------------------------------------------------

def symlog(x) -> np.ndarray:
    """Sign-preserving ``log(1 + |x|)``."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.log1p(np.abs(x))


def min_max(x) -> np.ndarray:
    """Rescale to [0, 1]; a constant input maps to all zeros."""
    x = np.asarray(x, dtype=float)
    lo, hi = x.min(), x.max()
    span = hi - lo
    if span == 0:
        return np.zeros_like(x)
    out = (x - lo) / span
    # rounding can leave values a hair outside [0, 1]
    return np.clip(out, 0.0, 1.0)


def normalize_history(history: Sequence[float]) -> np.ndarray:
    h = np.asarray(history, dtype=float)
    if h.ndim != 1 or h.size < 2:
        raise ValueError("history must be one-dimensional with at least 2 values")
    return min_max(symlog(h))


# -- dispersion statistics ---------------------------------------------------

def population_variance(h) -> float:
    h = np.asarray(h, dtype=float)
    return float(np.mean((h - h.mean()) ** 2))


def median_absolute_deviation(h) -> float:
    """Median of absolute deviations from the median.

    Even-length medians average the two central order statistics.
    """
    h = np.asarray(h, dtype=float)
    return float(np.median(np.abs(h - np.median(h))))


def _as_histories(histories) -> list[np.ndarray]:
    out = [np.asarray(h, dtype=float) for h in histories]
    if not out:
        raise ValueError("need at least one history")
    for h in out:
        if h.ndim != 1 or h.size < 2:
            raise ValueError("each history needs at least 2 values")
    return out


def _uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def variance_weights(histories, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Weights proportional to each history's population variance."""
    hs = _as_histories(histories)
    var = np.array([population_variance(h) for h in hs])
    if np.all(var < epsilon):
        return _uniform(len(hs))
    return var / var.sum()


def _posterior(scores: np.ndarray, priors: np.ndarray) -> np.ndarray:
    unnorm = priors * scores
    return unnorm / unnorm.sum()


def mad_weights(histories, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Weights proportional to the inverse MAD of each history.

    A MAD below ``epsilon`` is floored at ``epsilon``, so a flat history takes
    nearly all of the mass and all-flat histories end up uniform.
    """
    hs = _as_histories(histories)
    mads = np.array([median_absolute_deviation(h) for h in hs])
    inv = 1.0 / np.maximum(mads, epsilon)
    return inv / inv.sum()


def bayesian_weights(histories, priors, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Posterior weights: inverse-MAD likelihood times a prior over losses."""
    hs = _as_histories(histories)
    p = validate_priors(priors, len(hs))
    mads = np.array([median_absolute_deviation(h) for h in hs])
    return _posterior(1.0 / np.maximum(mads, epsilon), p)


def validate_priors(priors, n: int | None = None) -> np.ndarray:
    p = np.asarray(priors, dtype=float)
    if p.ndim != 1 or (n is not None and p.size != n):
        raise ValueError(f"expected {n} priors, got {p.size}")
    if not np.all(np.isfinite(p)) or np.any(p < 0) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"priors must be non-negative and sum to 1, got {p.tolist()}")
    return p


def strategy_weights(strategy, histories, priors=None,
                     epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    strategy = Strategy(strategy)
    if strategy is Strategy.VARIANCE:
        return variance_weights(histories, epsilon)
    if strategy is Strategy.MAD:
        return mad_weights(histories, epsilon)
    if priors is None:
        priors = _uniform(len(histories))
    return bayesian_weights(histories, priors, epsilon)


# -- controller --------------------------------------------------------------

@dataclass
class ControllerConfig:
    strategy: Strategy = Strategy.VARIANCE
    priors: tuple[float, ...] | None = None
    history_capacity: int = DEFAULT_CAPACITY
    warmup_steps: int = DEFAULT_WARMUP
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        self.strategy = Strategy(self.strategy)
        if self.history_capacity < 2:
            raise ValueError("history_capacity must be >= 2")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be >= 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.priors is not None:
            self.priors = tuple(float(v) for v in validate_priors(self.priors))


class StepResult(NamedTuple):
    total: float
    weights: np.ndarray
    gamma: float


class Controller:
    """Stateful loss fuser: N loss histories plus a decay schedule.

    Not thread-safe; give each training loop its own instance or serialize
    calls to :meth:`step`.
    """

    def __init__(self, n_losses: int, config: ControllerConfig | None = None,
                 schedule: DecaySchedule | None = None):
        if n_losses < 1:
            raise ValueError("need at least one base loss")
        self.config = config or ControllerConfig()
        self.schedule = schedule or DecaySchedule(gamma0=0.0)
        if self.config.priors is not None and len(self.config.priors) != n_losses:
            raise ValueError(f"{len(self.config.priors)} priors for {n_losses} losses")
        self.histories = [LossHistory(self.config.history_capacity) for _ in range(n_losses)]

    @property
    def n_losses(self) -> int:
        return len(self.histories)

    def current_weights(self, t: int) -> np.ndarray:
        cfg = self.config
        if t < cfg.warmup_steps or any(len(h) < 2 for h in self.histories):
            return _uniform(self.n_losses)
        normalized = [normalize_history(h.values) for h in self.histories]
        return strategy_weights(cfg.strategy, normalized, cfg.priors, cfg.epsilon)

    def step(self, base_losses: Sequence[float], aux_loss: float | None = None,
             t: int = 0) -> StepResult:
        losses = [float(v) for v in base_losses]
        if len(losses) != self.n_losses:
            raise ValueError(f"expected {self.n_losses} base losses, got {len(losses)}")
        bad = [v for v in losses if not math.isfinite(v)]
        if bad or (aux_loss is not None and not math.isfinite(aux_loss)):
            raise NonFiniteLossError(f"non-finite loss at step {t}")
        for h, v in zip(self.histories, losses):
            h.push(v)

        weights = self.current_weights(t)
        gamma = auxiliary_scale(self.schedule, t)
        total = float(np.dot(weights, losses))
        if aux_loss is not None:
            total += gamma * float(aux_loss)
        return StepResult(total, weights, gamma)

    # -- snapshot ------------------------------------------------------------

    def to_text(self) -> str:
        cfg = self.config
        lines = [
            f"strategy={cfg.strategy.value}",
            f"n_losses={self.n_losses}",
            f"history_capacity={cfg.history_capacity}",
            f"warmup_steps={cfg.warmup_steps}",
            f"epsilon={cfg.epsilon!r}",
            f"gamma0={self.schedule.gamma0!r}",
            f"tau={self.schedule.tau!r}",
            "priors=" + ("" if cfg.priors is None else ",".join(repr(p) for p in cfg.priors)),
        ]
        for i, h in enumerate(self.histories):
            lines.append(f"history_{i}=" + ",".join(repr(v) for v in h))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Controller":
        kv = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
            kv[key.strip()] = value.strip()

        def floats(s):
            return [float(v) for v in s.split(",")] if s else []

        priors = floats(kv.get("priors", ""))
        config = ControllerConfig(
            strategy=kv["strategy"],
            priors=tuple(priors) if priors else None,
            history_capacity=int(kv["history_capacity"]),
            warmup_steps=int(kv["warmup_steps"]),
            epsilon=float(kv["epsilon"]),
        )
        schedule = DecaySchedule(float(kv.get("gamma0", 0.0)), float(kv.get("tau", 0.0)))
        ctrl = cls(int(kv["n_losses"]), config, schedule)
        for i, h in enumerate(ctrl.histories):
            for v in floats(kv.get(f"history_{i}", "")):
                h.push(v)
        return ctrl
