"""Designer-preference steady-state deflection target.

Each row of the effectiveness matrix is sparsified according to the sign of
the requested moment increment on that axis, so that e.g. a nose-up pitch
increment is produced by the upper flaps only. Effector order is upper-left,
upper-right, lower-left, lower-right; axes are roll, pitch, yaw.
"""
from __future__ import annotations

import numpy as np

from .core import DimensionError
from .linalg import DEFAULT_RANK_TOL, pinv

# Kept columns (0-based) per axis for (increment >= 0, increment < 0).
KEEP_COLUMNS = (
    ((1, 2), (0, 3)),  # roll
    ((0, 1), (2, 3)),  # pitch
    ((1, 3), (0, 2)),  # yaw
)


def conditionalize(B, delta_nu) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    delta_nu = np.asarray(delta_nu, dtype=float).reshape(-1)
    if B.shape != (3, 4) or delta_nu.size != 3:
        raise DimensionError(
            f"conditionalization is defined for a 3x4 map, got {B.shape} with {delta_nu.size} axes")
    Bc = np.zeros_like(B)
    for axis, (pos, neg) in enumerate(KEEP_COLUMNS):
        cols = list(pos if delta_nu[axis] >= 0 else neg)
        Bc[axis, cols] = B[axis, cols]
    return Bc


def steady_state_target(B, u_r, delta_nu, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """``u_r + pinv(B_C(delta_nu)) @ delta_nu``; may lie outside the limits."""
    delta_nu = np.asarray(delta_nu, dtype=float).reshape(-1)
    Bc = conditionalize(B, delta_nu)
    return np.asarray(u_r, dtype=float) + pinv(Bc, rank_tol) @ delta_nu
