"""Attainable moment set: box-vertex images, hull facets and membership.

The set of moments reachable inside a deflection box is the image of the box
under ``B`` (a zonotope). It is represented here by the images of all ``2^m``
box corners plus, for three axes, a triangulated convex hull with outward
oriented facets.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .allocators import qpca
from .core import DimensionError, EffectiveBounds

MAX_EFFECTORS = 16
DEFAULT_CONTAINS_TOL = 1e-6


@dataclass
class MomentSet:
    vertices: np.ndarray  # (2^m, o) images of the box corners
    hull_facets: np.ndarray | None  # (k, 3) vertex indices, counter-clockwise seen from outside
    corners: np.ndarray  # (2^m, m) the box corners themselves

    @property
    def lower(self) -> np.ndarray:
        return self.vertices.min(axis=0)

    @property
    def upper(self) -> np.ndarray:
        return self.vertices.max(axis=0)

    @property
    def half_extent(self) -> np.ndarray:
        """Per-axis half-width of the bounding box of the set."""
        return 0.5 * (self.upper - self.lower)


def box_corners(bounds: EffectiveBounds) -> np.ndarray:
    m = bounds.lo.size
    if m > MAX_EFFECTORS:
        raise ValueError(f"vertex enumeration limited to {MAX_EFFECTORS} effectors, got {m}")
    pick = np.array(list(itertools.product((0, 1), repeat=m)), dtype=bool)
    return np.where(pick, bounds.hi, bounds.lo)


def _hull_facets(points: np.ndarray) -> np.ndarray:
    """Triangulated hull with facets oriented outward.

    Returns an empty array when the points do not span three dimensions
    (zero-width box or rank-deficient map), where no solid hull exists.
    """
    scale = max(1.0, float(np.abs(points).max(initial=0.0)))
    centred = points - points.mean(axis=0)
    sv = np.linalg.svd(centred, compute_uv=False)
    if sv.size < 3 or sv[2] <= 1e-9 * scale:
        return np.zeros((0, 3), dtype=int)
    try:
        hull = ConvexHull(points, qhull_options="Qt")
    except QhullError:
        return np.zeros((0, 3), dtype=int)
    facets = hull.simplices.copy()
    for k, (tri, eq) in enumerate(zip(facets, hull.equations)):
        a, b, c = points[tri]
        if np.dot(np.cross(b - a, c - a), eq[:3]) < 0:
            facets[k] = tri[[0, 2, 1]]
    return facets


def moment_set(B, bounds: EffectiveBounds, *, hull: bool = True) -> MomentSet:
    """Images of every box corner and, for three axes, their convex hull.

    With ``hull=True`` and ``o != 3`` a :class:`DimensionError` is raised; pass
    ``hull=False`` to get the vertex list for any number of axes.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    corners = box_corners(bounds)
    vertices = corners @ B.T
    facets = None
    if hull:
        if B.shape[0] != 3:
            raise DimensionError(f"hull export needs 3 axes, got {B.shape[0]}")
        facets = _hull_facets(vertices)
    return MomentSet(vertices=vertices, hull_facets=facets, corners=corners)


def contains(B, bounds: EffectiveBounds, nu, tol: float = DEFAULT_CONTAINS_TOL) -> bool:
    """True if some deflection in the box reproduces ``nu`` to within ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    res = qpca(B, nu, None, bounds=bounds, reg_lambda=0.0)
    return res.error <= tol


def write_csv(ms: MomentSet, out_dir) -> tuple[Path, Path]:
    """Write ``vertices.csv`` and ``facets.csv`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    o = ms.vertices.shape[1]
    m = ms.corners.shape[1]
    axes = ["nu_x", "nu_y", "nu_z"] if o == 3 else [f"nu_{k + 1}" for k in range(o)]
    vpath = out_dir / "vertices.csv"
    with vpath.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", *axes, *(f"u{i + 1}" for i in range(m))])
        for k, (v, c) in enumerate(zip(ms.vertices, ms.corners)):
            w.writerow([k, *(repr(float(x)) for x in v), *(repr(float(x)) for x in c)])
    fpath = out_dir / "facets.csv"
    with fpath.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["facet", "v1", "v2", "v3"])
        facets = ms.hull_facets if ms.hull_facets is not None else np.zeros((0, 3), dtype=int)
        for k, tri in enumerate(facets):
            w.writerow([k, *(int(i) for i in tri)])
    return vpath, fpath
