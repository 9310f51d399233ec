"""Generic quadratic-programming reference path for timing comparisons.

The allocation problem is posed the way a general-purpose QP solver sees it:
normal equations ``P = B^T W B + 2*lambda*I``, ``q = -B^T W nu``, and the box
written as ``2m`` general inequality rows ``G u <= h``. Nothing about the box
structure is exploited. Each call starts cold: a phase-one linear program finds
a feasible vertex, then a gradient-projection active-set iteration solves
the QP.

This is deliberately not a fast path. It exists to show the cost gap between
closed-form filter gains and a generic solver on the same problem.
"""
from __future__ import annotations

import time

import numpy as np
from scipy.optimize import linprog

from .allocators import AllocationResult, _bounds, _prep, _result
from .core import AllocationError, EffectiveBounds


def normal_equations(B, nu, W=None, reg_lambda: float = 1e-6):
    B = np.atleast_2d(np.asarray(B, dtype=float))
    W = np.eye(B.shape[0]) if W is None else np.asarray(W, dtype=float)
    P = B.T @ W @ B + 2.0 * reg_lambda * np.eye(B.shape[1])
    q = -B.T @ W @ np.asarray(nu, dtype=float)
    return P, q


def box_as_inequalities(bounds: EffectiveBounds):
    m = bounds.lo.size
    G = np.vstack([np.eye(m), -np.eye(m)])
    h = np.concatenate([bounds.hi, -bounds.lo])
    return G, h


def projected_active_set_qp(P, q, G, h, *, tol: float = 1e-10,
                            max_iter: int = 200_000) -> tuple[np.ndarray, int]:
    """Gradient-projection active-set method for ``min 0.5 x'Px + q'x, G x <= h``.

    The search direction is the negative gradient projected onto the null
    space of the working-set rows, followed by an exact line search capped at
    the first blocking constraint. Constraints are dropped by the most
    negative multiplier once the projected gradient vanishes.
    """
    n = P.shape[0]
    lp = linprog(np.zeros(n), A_ub=G, b_ub=h, bounds=[(None, None)] * n, method="highs")
    if lp.status != 0:
        raise AllocationError(f"phase one failed: {lp.message}")
    x = lp.x
    scale = 1.0 + np.abs(h).max(initial=0.0)
    work = [i for i in range(G.shape[0]) if abs(G[i] @ x - h[i]) <= 1e-9 * scale][:n]
    gtol = tol * (1.0 + np.linalg.norm(q))
    for it in range(1, max_iter + 1):
        g = P @ x + q
        if work:
            A = G[work]
            M = np.linalg.pinv(A @ A.T)
            Ag = M @ (A @ g)
            d = -(g - A.T @ Ag)
        else:
            d = -g
        if np.linalg.norm(d) <= gtol:
            if not work:
                return x, it
            mu = -Ag
            if mu.min() >= -gtol:
                return x, it
            work.pop(int(np.argmin(mu)))
            continue
        curv = d @ P @ d
        alpha = -(g @ d) / curv if curv > 0 else np.inf
        Gd = G @ d
        slack = h - G @ x
        block = None
        for i in range(G.shape[0]):
            if i not in work and Gd[i] > 0 and slack[i] / Gd[i] < alpha:
                alpha, block = slack[i] / Gd[i], i
        if not np.isfinite(alpha):
            raise AllocationError("generic QP is unbounded along the search direction")
        x = x + alpha * d
        if block is not None:
            work.append(block)
    raise AllocationError(f"projected active-set QP did not converge in {max_iter} iterations")


def generic_qp(B, nu, limits=None, state=None, W=None, reg_lambda: float = 1e-6, *,
               bounds: EffectiveBounds | None = None) -> AllocationResult:
    """Same problem as :func:`qpca`, solved as a generic inequality-constrained QP."""
    t0 = time.perf_counter()
    B, nu = _prep(B, nu)
    eb = _bounds(limits, state, bounds)
    P, q = normal_equations(B, nu, W, reg_lambda)
    G, h = box_as_inequalities(eb)
    u, it = projected_active_set_qp(P, q, G, h)
    return _result(B, nu, eb.clamp(u), it, t0)
