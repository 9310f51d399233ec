"""Actuator limit types and the saturation functions shared by every allocator.

Units are fixed throughout the package: deflections in deg, rates in deg/s,
moments in Nm and time in s.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_DT = 0.01
DEFAULT_TOL = 1e-9


class AllocationError(Exception):
    """Base class for errors raised by the allocation library."""


class DimensionError(AllocationError, ValueError):
    pass


class DegenerateLimitsError(AllocationError, ValueError):
    pass


class DegenerateWeightsError(AllocationError, ValueError):
    pass


def _vec(x, name: str, size: int | None = None) -> np.ndarray:
    a = np.array(x, dtype=float).reshape(-1)
    if size is not None and a.size != size:
        raise DimensionError(f"{name}: expected {size} entries, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name}: entries must be finite")
    a.setflags(write=False)
    return a


def as_effectiveness(B) -> np.ndarray:
    """Validate a control effectiveness matrix (o x m, m >= o, finite)."""
    B = np.array(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(1, -1)
    if B.ndim != 2:
        raise DimensionError("effectiveness matrix must be 2-D")
    o, m = B.shape
    if o < 1 or m < o:
        raise DimensionError(f"effectiveness matrix must be over-actuated, got {o}x{m}")
    if not np.all(np.isfinite(B)):
        raise ValueError("effectiveness matrix entries must be finite")
    return B


@dataclass(frozen=True)
class ActuatorLimits:
    """Per-effector magnitude bounds (deg) and rate bounds (deg/s)."""

    u_min: np.ndarray
    u_max: np.ndarray
    rate_min: np.ndarray
    rate_max: np.ndarray

    def __post_init__(self):
        u_min = _vec(self.u_min, "u_min")
        m = u_min.size
        object.__setattr__(self, "u_min", u_min)
        object.__setattr__(self, "u_max", _vec(self.u_max, "u_max", m))
        object.__setattr__(self, "rate_min", _vec(self.rate_min, "rate_min", m))
        object.__setattr__(self, "rate_max", _vec(self.rate_max, "rate_max", m))
        bad = np.flatnonzero(self.u_min > self.u_max)
        if bad.size:
            raise ValueError(f"u_min > u_max for effector(s) {(bad + 1).tolist()}")
        bad = np.flatnonzero((self.rate_min > 0) | (self.rate_max < 0))
        if bad.size:
            raise ValueError(f"rate bounds must bracket zero for effector(s) {(bad + 1).tolist()}")

    @property
    def m(self) -> int:
        return self.u_min.size

    @classmethod
    def magnitude_only(cls, u_min, u_max, rate: float = 1e6) -> "ActuatorLimits":
        """Limits with rate bounds wide enough to never bind."""
        u_min = np.asarray(u_min, dtype=float)
        return cls(u_min, u_max, np.full(u_min.size, -rate), np.full(u_min.size, rate))


@dataclass(frozen=True)
class ActuatorState:
    """Deflection history: ``u_prev`` = u(t-T), ``u_prev2`` = u(t-2T)."""

    u_prev: np.ndarray
    u_prev2: np.ndarray
    dt: float = DEFAULT_DT

    def __post_init__(self):
        u_prev = _vec(self.u_prev, "u_prev")
        object.__setattr__(self, "u_prev", u_prev)
        object.__setattr__(self, "u_prev2", _vec(self.u_prev2, "u_prev2", u_prev.size))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "dt", float(self.dt))

    @classmethod
    def at_rest(cls, u, dt: float = DEFAULT_DT) -> "ActuatorState":
        return cls(u, u, dt)

    @property
    def last_rate(self) -> np.ndarray:
        return (self.u_prev - self.u_prev2) / self.dt


@dataclass(frozen=True)
class EffectiveBounds:
    """Intersection of magnitude limits and the zero-order-hold rate limits."""

    lo: np.ndarray
    hi: np.ndarray

    def clamp(self, u) -> np.ndarray:
        return np.minimum(np.maximum(u, self.lo), self.hi)


def saturate_rate(rate, limits: ActuatorLimits) -> np.ndarray:
    return np.clip(np.asarray(rate, dtype=float), limits.rate_min, limits.rate_max)


def effective_bounds(limits: ActuatorLimits, state: ActuatorState) -> EffectiveBounds:
    """Feasible deflection interval for the next step.

    When a scheduled magnitude bound has moved past ``u_prev`` by more than one
    step of rate travel, the interval collapses onto the rate-reachable point
    closest to the magnitude box.
    """
    reach_lo = state.u_prev + limits.rate_min * state.dt
    reach_hi = state.u_prev + limits.rate_max * state.dt
    lo = np.maximum(limits.u_min, reach_lo)
    hi = np.minimum(limits.u_max, reach_hi)
    empty = lo > hi
    if np.any(empty):
        target = np.clip(state.u_prev, limits.u_min, limits.u_max)
        point = np.clip(target, reach_lo, reach_hi)
        lo = np.where(empty, point, lo)
        hi = np.where(empty, point, hi)
    return EffectiveBounds(lo, hi)


def saturate(u, limits: ActuatorLimits, state: ActuatorState) -> np.ndarray:
    return effective_bounds(limits, state).clamp(np.asarray(u, dtype=float))


def is_feasible(u, limits: ActuatorLimits, state: ActuatorState, tol: float = DEFAULT_TOL) -> bool:
    b = effective_bounds(limits, state)
    u = np.asarray(u, dtype=float)
    return bool(np.all(u >= b.lo - tol) and np.all(u <= b.hi + tol))
