"""Bounded-variable least squares by a primal active-set method.

Solves ``min 0.5*||A x - b||^2`` subject to ``lo <= x <= hi`` for small dense
problems. Free-variable subproblems are solved with an SVD least-squares
solve, so rank-deficient ``A`` (more effectors than axes, no regulariser) is
handled; among several minimizers the iteration lands on one of them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AllocationError


class CyclingError(AllocationError, RuntimeError):
    """Active-set iteration exceeded its pivot budget."""


@dataclass
class BVLSResult:
    x: np.ndarray
    cost: float
    iterations: int
    kkt_violation: float
    status: str  # "optimal" or "max_pivots"


def kkt_violation(g: np.ndarray, x: np.ndarray, lo: np.ndarray, hi: np.ndarray, btol: float) -> np.ndarray:
    """Per-variable first-order violation for gradient ``g`` at ``x``."""
    at_lo = x <= lo + btol
    at_hi = x >= hi - btol
    fixed = at_lo & at_hi
    v = np.abs(g)
    v = np.where(at_lo & ~fixed, np.maximum(-g, 0.0), v)
    v = np.where(at_hi & ~fixed, np.maximum(g, 0.0), v)
    return np.where(fixed, 0.0, v)


def bvls(A, b, lo, hi, *, tol: float | None = None, max_pivots: int | None = None,
         x0=None, raise_on_cycle: bool = True) -> BVLSResult:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    lo = np.asarray(lo, dtype=float).reshape(-1)
    hi = np.asarray(hi, dtype=float).reshape(-1)
    n_rows, n = A.shape
    if np.any(lo > hi):
        raise ValueError("bvls: lo > hi")
    if max_pivots is None:
        max_pivots = 10 * n * n_rows
    scale = max(1.0, np.linalg.norm(A, 2) * (np.linalg.norm(b) + 1.0))
    if tol is None:
        tol = 1e-12 * scale
    span = np.maximum(hi - lo, 0.0)
    btol = 1e-14 * np.maximum(1.0, np.abs(lo) + np.abs(hi))

    # Cold start: clamp the unconstrained minimum-norm solution.
    if x0 is None:
        x0 = np.linalg.lstsq(A, b, rcond=None)[0]
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    free = (x > lo) & (x < hi)
    free &= span > 0

    pivots = 0
    while True:
        # Inner loop: minimise over the free set, stepping back to feasibility.
        while True:
            fidx = np.flatnonzero(free)
            if fidx.size == 0:
                break
            xf = x[fidx]
            # Minimum-norm step to the free-set minimizer (not minimum-norm point),
            # so a rank-deficient free set does not jump across its solution set.
            r = b - A @ x
            z = xf + np.linalg.lstsq(A[:, fidx], r, rcond=None)[0]
            below = z < lo[fidx]
            above = z > hi[fidx]
            if not (below.any() or above.any()):
                x[fidx] = z
                break
            pivots += 1
            if pivots > max_pivots:
                return _finish(A, b, x, lo, hi, btol, pivots, "max_pivots", raise_on_cycle)
            d = z - xf
            with np.errstate(divide="ignore", invalid="ignore"):
                alpha = np.where(below, (lo[fidx] - xf) / d, np.where(above, (hi[fidx] - xf) / d, np.inf))
            alpha = np.clip(alpha, 0.0, 1.0)
            a = alpha.min()
            x[fidx] = xf + a * d
            # Blocking variables are pinned exactly on their bound.
            blocking = (alpha <= a + 1e-15) & (below | above)
            for k in np.flatnonzero(blocking):
                i = fidx[k]
                x[i] = lo[i] if below[k] else hi[i]
                free[i] = False
            np.clip(x, lo, hi, out=x)

        g = A.T @ (A @ x - b)
        viol = kkt_violation(g, x, lo, hi, btol)
        viol[free] = 0.0
        candidates = np.flatnonzero((viol > tol) & (span > 0))
        if candidates.size == 0:
            return _finish(A, b, x, lo, hi, btol, pivots, "optimal", raise_on_cycle)
        pivots += 1
        if pivots > max_pivots:
            return _finish(A, b, x, lo, hi, btol, pivots, "max_pivots", raise_on_cycle)
        # Bland-style rule: release the lowest-index violator.
        free[candidates[0]] = True


def _finish(A, b, x, lo, hi, btol, pivots, status, raise_on_cycle) -> BVLSResult:
    if status != "optimal" and raise_on_cycle:
        raise CyclingError(f"active-set guard tripped after {pivots} pivots")
    r = A @ x - b
    g = A.T @ r
    return BVLSResult(x=x, cost=0.5 * float(r @ r), iterations=pivots,
                      kkt_violation=float(kkt_violation(g, x, lo, hi, btol).max(initial=0.0)),
                      status=status)
