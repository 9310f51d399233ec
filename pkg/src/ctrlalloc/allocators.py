"""Control allocation algorithms.

Every allocator maps a moment demand ``nu`` to an :class:`AllocationResult`.
Except for :func:`pica`, results respect the effective (magnitude and rate)
bounds of the current step.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bvls import bvls
from .core import ActuatorLimits, ActuatorState, EffectiveBounds, effective_bounds
from .linalg import DEFAULT_RANK_TOL, filter_gains, pinv, rank
from .weighting import WeightingMatrices

SATURATION_TOL = 1e-12


@dataclass
class AllocationResult:
    u: np.ndarray
    achieved: np.ndarray
    residual: np.ndarray
    iterations: int = 1
    elapsed: float = 0.0

    @property
    def cost(self) -> float:
        return float(np.linalg.norm(self.u))

    @property
    def error(self) -> float:
        return float(np.linalg.norm(self.residual))


@dataclass(frozen=True)
class IdcaConfig:
    """Iteration controls for :func:`idca`.

    ``rate_update="verbatim"`` shrinks the rate bounds by ``(u_j - u_prev)/T``
    per iteration exactly as the published recursion reads; the default
    ``"telescoping"`` shifts them by the accumulated increment so the final sum
    stays inside the rate-limited box.

    ``freeze_policy="all"`` drops every saturated effector after a pass. The
    default ``"rank_guarded"`` does the same unless it would leave fewer
    independent columns than axes; then only the saturated effector whose
    removal gives the smallest next-pass residual is dropped, the others stay
    free at their clipped values.
    """

    max_iterations: int = 8
    residual_tol: float = 1e-6
    rank_tol: float = DEFAULT_RANK_TOL
    adjust_steady_state: bool = True
    rate_update: str = "telescoping"
    freeze_policy: str = "rank_guarded"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.rate_update not in ("telescoping", "verbatim"):
            raise ValueError(f"unknown rate_update {self.rate_update!r}")
        if self.freeze_policy not in ("rank_guarded", "all"):
            raise ValueError(f"unknown freeze_policy {self.freeze_policy!r}")


def _result(B, nu, u, iterations, t0) -> AllocationResult:
    achieved = B @ u
    return AllocationResult(u=u, achieved=achieved, residual=nu - achieved,
                            iterations=iterations, elapsed=time.perf_counter() - t0)


def _prep(B, nu):
    B = np.atleast_2d(np.asarray(B, dtype=float))
    nu = np.asarray(nu, dtype=float).reshape(-1)
    return B, nu


def _bounds(limits, state, bounds) -> EffectiveBounds:
    if bounds is not None:
        return bounds
    if state is None:
        state = ActuatorState.at_rest(np.zeros(limits.m))
    return effective_bounds(limits, state)


def pica(B, nu, rank_tol: float = DEFAULT_RANK_TOL) -> AllocationResult:
    """Minimum-norm pseudoinverse allocation; ignores all limits."""
    t0 = time.perf_counter()
    B, nu = _prep(B, nu)
    return _result(B, nu, pinv(B, rank_tol) @ nu, 1, t0)


def saturated_pica(B, nu, limits: ActuatorLimits, state: ActuatorState | None = None, *,
                   bounds: EffectiveBounds | None = None,
                   rank_tol: float = DEFAULT_RANK_TOL) -> AllocationResult:
    t0 = time.perf_counter()
    B, nu = _prep(B, nu)
    eb = _bounds(limits, state, bounds)
    return _result(B, nu, eb.clamp(pinv(B, rank_tol) @ nu), 1, t0)


def _redistribute(B, nu, eb: EffectiveBounds, max_iter: int, tol: float, rank_tol: float,
                  scaled: bool) -> tuple[np.ndarray, int]:
    m = B.shape[1]
    Bs = B.copy()
    active = np.ones(m, dtype=bool)
    acc = np.zeros(m)
    lo, hi = eb.lo.copy(), eb.hi.copy()
    r = nu.copy()
    it = 0
    for it in range(1, max_iter + 1):
        u = pinv(Bs, rank_tol) @ r
        u[~active] = 0.0
        forced = np.zeros(m, dtype=bool)
        if scaled:
            lim = np.where(u > 0, hi, lo)
            nz = active & (u != 0)
            ratios = np.full(m, np.inf)
            ratios[nz] = lim[nz] / u[nz]
            a = min(1.0, ratios.min(initial=np.inf))
            if a <= 0.0:
                # Zero-scaled step: nothing can move along this direction.
                break
            u = a * u
            if a < 1.0:
                forced = nz & (ratios <= a * (1 + 1e-12))
        s = np.clip(u, lo, hi)
        sat = active & (forced | (s != u) | (np.abs(s - lo) <= SATURATION_TOL) | (np.abs(s - hi) <= SATURATION_TOL))
        acc += s
        lo -= s
        hi -= s
        r = nu - B @ acc
        if np.linalg.norm(r) <= tol or not sat.any():
            break
        active &= ~sat
        Bs[:, ~active] = 0.0
        if rank(Bs, rank_tol) == 0:
            break
    return eb.clamp(acc), it


def rpica(B, nu, limits: ActuatorLimits, state: ActuatorState | None = None, max_iter: int = 8, *,
          bounds: EffectiveBounds | None = None, residual_tol: float = 1e-6,
          rank_tol: float = DEFAULT_RANK_TOL) -> AllocationResult:
    """Redistributed pseudoinverse: saturate, drop saturated columns, reallocate the rest."""
    t0 = time.perf_counter()
    B, nu = _prep(B, nu)
    u, it = _redistribute(B, nu, _bounds(limits, state, bounds), max_iter, residual_tol, rank_tol, False)
    return _result(B, nu, u, it, t0)


def rspica(B, nu, limits: ActuatorLimits, state: ActuatorState | None = None, max_iter: int = 8, *,
           bounds: EffectiveBounds | None = None, residual_tol: float = 1e-6,
           rank_tol: float = DEFAULT_RANK_TOL) -> AllocationResult:
    """Scaled redistributed pseudoinverse.

    Each increment is shrunk by ``a = min(1, l_i/u_i)`` so that only the most
    violating effector reaches its bound and the increment keeps its
    direction. Components with a zero candidate are left out of the minimum.
    With a zero lower bound and a negative component, ``a = 0`` and the
    allocation stops with a trivial command.
    """
    t0 = time.perf_counter()
    B, nu = _prep(B, nu)
    u, it = _redistribute(B, nu, _bounds(limits, state, bounds), max_iter, residual_tol, rank_tol, True)
    return _result(B, nu, u, it, t0)


def qpca(B, nu, limits: ActuatorLimits, state: ActuatorState | None = None, W=None,
         reg_lambda: float = 1e-6, u_ref=None, *, bounds: EffectiveBounds | None = None,
         max_pivots: int | None = None) -> AllocationResult:
    """Box-constrained weighted least squares.

    Minimises ``0.5*||B u - nu||_W^2 + reg_lambda*||u - u_ref||^2`` over the
    effective box. With ``reg_lambda > 0`` the active set found for the
    regularised problem is re-solved exactly (least residual first, then
    least distance to ``u_ref``), which selects the minimum-distance point
    among exact solutions without the O(reg_lambda) bias.
    """
    t0 = time.perf_counter()
    B, nu = _prep(B, nu)
    o, m = B.shape
    eb = _bounds(limits, state, bounds)
    Wh = np.eye(o) if W is None else np.linalg.cholesky(np.asarray(W, dtype=float)).T
    u_ref = np.zeros(m) if u_ref is None else np.asarray(u_ref, dtype=float)
    if max_pivots is None:
        max_pivots = 10 * m * o
    if reg_lambda > 0:
        rho = np.sqrt(2.0 * reg_lambda)
        A = np.vstack([Wh @ B, rho * np.eye(m)])
        b = np.concatenate([Wh @ nu, rho * u_ref])
    else:
        A, b = Wh @ B, Wh @ nu
    sol = bvls(A, b, eb.lo, eb.hi, max_pivots=max_pivots)
    u = sol.x
    if reg_lambda > 0:
        u = _polish(Wh @ B, Wh @ nu, u, eb, u_ref)
    return _result(B, nu, u, sol.iterations, t0)


def _polish(A, b, u, eb: EffectiveBounds, u_ref) -> np.ndarray:
    tol = 1e-12 * np.maximum(1.0, np.abs(eb.lo) + np.abs(eb.hi))
    free = (u > eb.lo + tol) & (u < eb.hi - tol)
    if not free.any():
        return u
    v = u.copy()
    v[free] = u_ref[free]
    Af = A[:, free]
    v[free] += pinv(Af) @ (b - A @ v)
    if np.any(v < eb.lo - tol) or np.any(v > eb.hi + tol):
        return u
    v = eb.clamp(v)
    if np.linalg.norm(A @ v - b) > np.linalg.norm(A @ u - b) * (1 + 1e-9) + 1e-12:
        return u
    return v


def _filter_step(B, active, wm, wr, target, u_tau, acc, r, rank_tol):
    Bs = B * active
    E, F, G = filter_gains(Bs, wm, wr, rank_tol)
    d = E @ (target - acc) + F @ (u_tau - acc) + G @ r
    d[~active] = 0.0
    return d


def _pick_freeze(B, nu, active, sat, s, acc, eb_lo, eb_hi, wm, wr, target, u_tau, rank_tol):
    """Single saturated effector whose removal leaves the smallest next residual."""
    acc2 = acc + s
    r2 = nu - B @ acc2
    best, best_res = -1, np.inf
    for i in np.flatnonzero(sat):
        a2 = active.copy()
        a2[i] = False
        d2 = _filter_step(B, a2, wm, wr, target, u_tau, acc2, r2, rank_tol)
        s2 = np.clip(d2, eb_lo - acc2, eb_hi - acc2)
        res = np.linalg.norm(r2 - B @ s2)
        if res < best_res:
            best, best_res = i, res
    frozen = np.zeros_like(sat)
    frozen[best] = True
    return frozen


def idca(B, nu, limits: ActuatorLimits, state: ActuatorState, u_s, weights: WeightingMatrices,
         cfg: IdcaConfig | None = None) -> AllocationResult:
    """Iterative dynamic control allocation.

    Each pass solves the two-term weighted least-squares problem in closed
    form (linear filter gains for the still-free effectors), saturates the
    increment against the remaining room, freezes effectors that hit a bound
    and hands the unmet moment to the next pass. The returned command is the
    sum of the saturated increments.

    Both references (``u_s`` and ``u(t-T)``) are re-expressed relative to the
    running sum, so later passes solve the same weighted problem with the
    frozen effectors held where they stopped.
    """
    t0 = time.perf_counter()
    cfg = cfg or IdcaConfig()
    B, nu = _prep(B, nu)
    o, m = B.shape
    u_s = np.asarray(u_s, dtype=float)
    u_tau = state.u_prev
    dt = state.dt
    wm = np.diag(weights.W_m) if np.ndim(weights.W_m) == 2 else np.asarray(weights.W_m, dtype=float)
    wr = np.diag(weights.W_r) if np.ndim(weights.W_r) == 2 else np.asarray(weights.W_r, dtype=float)

    eb = effective_bounds(limits, state)
    verbatim = cfg.rate_update == "verbatim"
    if verbatim:
        mag_lo, mag_hi = limits.u_min.copy(), limits.u_max.copy()
        r_lo, r_hi = limits.rate_min.copy(), limits.rate_max.copy()

    active = np.ones(m, dtype=bool)
    acc = np.zeros(m)
    r = nu.copy()
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        if cfg.adjust_steady_state:
            d = _filter_step(B, active, wm, wr, u_s, u_tau, acc, r, cfg.rank_tol)
        else:
            d = _filter_step(B, active, wm, wr, u_s + acc, u_tau, acc, r, cfg.rank_tol)
        if verbatim:
            lo = np.maximum(mag_lo, u_tau + r_lo * dt)
            hi = np.maximum(lo, np.minimum(mag_hi, u_tau + r_hi * dt))
        else:
            lo, hi = eb.lo - acc, eb.hi - acc
        s = np.clip(d, lo, hi)
        sat = active & ((s != d) | (np.abs(s - lo) <= SATURATION_TOL) | (np.abs(s - hi) <= SATURATION_TOL))
        frozen = sat
        if (cfg.freeze_policy == "rank_guarded" and np.count_nonzero(sat) > 1
                and rank(B[:, active & ~sat], cfg.rank_tol) < min(o, rank(B[:, active], cfg.rank_tol))):
            frozen = _pick_freeze(B, nu, active, sat, s, acc, eb.lo, eb.hi, wm, wr, u_s, u_tau, cfg.rank_tol)
        acc += s
        r = nu - B @ acc
        if np.linalg.norm(r) <= cfg.residual_tol:
            break
        if verbatim:
            mag_lo -= s
            mag_hi -= s
            r_lo -= (s - u_tau) / dt
            r_hi -= (s - u_tau) / dt
        if not sat.any():
            break
        active &= ~frozen
        if rank(B * active, cfg.rank_tol) == 0:
            break
    # Telescoping bounds keep the sum inside the box up to rounding; the
    # verbatim recursion does not, so the final command is clamped either way.
    return _result(B, nu, eb.clamp(acc), it, t0)
