"""Diagonal weighting matrices for the dynamic allocation cost.

The magnitude weight combines a deflection term (how far an effector already
sits towards its limit) with a drag-proxy term standing in for thermal load.
The rate weight grows as the last recorded rate approaches the rate bound in
the direction of motion.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ActuatorLimits, ActuatorState, DegenerateLimitsError

DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True)
class DragModel:
    """Affine drag-coefficient proxy, ``C_D = max(floor, c0 + c1 * u)``."""

    c0: np.ndarray = field(default_factory=lambda: np.full(4, 0.001))
    c1: np.ndarray = field(default_factory=lambda: np.array([0.004, 0.004, 0.008, 0.008]))
    floor: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "c0", np.asarray(self.c0, dtype=float))
        object.__setattr__(self, "c1", np.asarray(self.c1, dtype=float))
        if self.c0.shape != self.c1.shape:
            raise ValueError("drag c0 and c1 must have the same length")
        if not self.floor > 0:
            raise ValueError("drag floor must be positive")

    def coefficients(self, u) -> np.ndarray:
        return np.maximum(self.floor, self.c0 + self.c1 * np.asarray(u, dtype=float))


@dataclass(frozen=True)
class WeightingConfig:
    epsilon: float = DEFAULT_EPSILON
    drag: DragModel = field(default_factory=DragModel)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class WeightingMatrices:
    W_m: np.ndarray
    W_r: np.ndarray

    @classmethod
    def uniform(cls, m: int, w_m: float = DEFAULT_EPSILON, w_r: float = 0.0) -> "WeightingMatrices":
        return cls(w_m * np.eye(m), w_r * np.eye(m))


def magnitude_weights(u, u_max, drag: DragModel, epsilon: float = DEFAULT_EPSILON,
                      u_min=None) -> np.ndarray:
    """Deflection-times-drag weighting, ``diag(w_mD * w_mT) + eps*I``.

    ``u_max`` is the scheduled magnitude limit of the current step, before
    intersection with the rate limits. Negative deflections are normalised by
    ``max(|u_min|, |u_max|)``; a limit scheduled to exactly zero pins the
    entry to ``1 + eps``.
    """
    u = np.asarray(u, dtype=float)
    u_max = np.broadcast_to(np.asarray(u_max, dtype=float), u.shape)
    if np.any(u_max < 0):
        raise DegenerateLimitsError("magnitude weighting needs u_max >= 0")
    u_min = np.zeros_like(u) if u_min is None else np.broadcast_to(np.asarray(u_min, dtype=float), u.shape)

    pinned = u_max == 0
    scale = np.where(u >= 0, u_max, np.maximum(np.abs(u_min), u_max))
    with np.errstate(divide="ignore", invalid="ignore"):
        w_defl = np.where(scale > 0, np.abs(u) / scale, 1.0)
    cd = drag.coefficients(u)
    w_therm = cd / cd.max()
    w = np.where(pinned, 1.0, w_defl * w_therm) + epsilon
    return np.diag(np.maximum(w, epsilon))


def rate_weights(state: ActuatorState, limits: ActuatorLimits,
                 epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Rate-proximity weighting, ``diag(|udot| / udot_crit) + eps*I``."""
    if np.any(limits.rate_max == 0) or np.any(limits.rate_min == 0):
        raise DegenerateLimitsError("rate weighting needs nonzero rate bounds")
    rate = state.last_rate
    crit = np.where(rate >= 0, np.abs(limits.rate_max), np.abs(limits.rate_min))
    return np.diag(np.abs(rate) / crit + epsilon)


def compute_weights(limits: ActuatorLimits, state: ActuatorState,
                    cfg: WeightingConfig | None = None) -> WeightingMatrices:
    """Both weighting matrices evaluated at the current deflection ``u(t-T)``."""
    cfg = cfg or WeightingConfig()
    W_m = magnitude_weights(state.u_prev, limits.u_max, cfg.drag, cfg.epsilon, limits.u_min)
    W_r = rate_weights(state, limits, cfg.epsilon)
    return WeightingMatrices(W_m, W_r)
