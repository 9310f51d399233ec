"""Small dense linear algebra: SVD pseudoinverse and linear-filter gains."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import DegenerateWeightsError

DEFAULT_RANK_TOL = 1e-12


def pinv(A, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``rank_tol * sigma_max`` are treated as zero, so a
    zero matrix maps to a zero pseudoinverse.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(A.shape[::-1])
    keep = s > rank_tol * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def rank(A, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    s = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


class LinearFilterGains(NamedTuple):
    """Gains of u = E u_s + F u_prev + G nu."""

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray


def _diag(W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    return np.diag(W).copy() if W.ndim == 2 else W.copy()


def filter_gains(B, W_m, W_r, rank_tol: float = DEFAULT_RANK_TOL) -> LinearFilterGains:
    """Explicit solution of the two-term weighted least-squares allocation.

    ``W_m`` and ``W_r`` are diagonal (passed as matrices or as their
    diagonals). With ``W = sqrt(W_m^2 + W_r^2)``::

        G = W^-1 (B W^-1)^+
        E = (I - G B) W^-2 W_m^2
        F = (I - G B) W^-2 W_r^2
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    wm2 = _diag(W_m) ** 2
    wr2 = _diag(W_r) ** 2
    w = np.sqrt(wm2 + wr2)
    if np.any(~(w > 0)):
        raise DegenerateWeightsError("combined weighting must be strictly positive")
    winv = 1.0 / w
    G = winv[:, None] * pinv(B * winv, rank_tol)
    N = np.eye(B.shape[1]) - G @ B
    E = N * (wm2 / w**2)
    F = N * (wr2 / w**2)
    return LinearFilterGains(E, F, G)
