"""Half-sphere geometry helpers.

Directions live on the half-unit (p-1)-sphere: x and -x denote the same
axis, and the canonical representative is the one whose first nonzero
coordinate is positive.

Two spherical-angle conventions are supported for building unit vectors
from p-1 angles in [0, pi).  Both are nested elevation decompositions
("elevation" = the angle whose sine becomes the last coordinate); they
differ only in the order the angles are listed:

* ``elevation_last``: angles (a_1, ..., a_{p-1}) map to
  [cos a_1 * ... * cos a_{p-1},
   sin a_1 * cos a_2 * ... * cos a_{p-1},
   sin a_2 * cos a_3 * ... * cos a_{p-1},
   ...,
   sin a_{p-1}]
* ``elevation_first``: the same map applied to the reversed angle list,
  so the first listed angle is the elevation.

Over [0, pi)^(p-1) either map covers one hemisphere exactly once (up to a
measure-zero set); the surface area element in these coordinates is
prod_{j=2}^{p-1} |cos a_j|^(j-1) with a_j in nested (elevation-last) order.
"""

from __future__ import annotations

import numpy as np

CONVENTIONS = ("elevation_last", "elevation_first")

UNIT_NORM_TOL = 1e-9


def normalize_rows(x):
    """Scale the rows of a 2-D array to unit Euclidean norm."""
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("cannot normalize a zero vector")
    return x / norms


def canonicalize(x):
    """Flip directions so the first nonzero coordinate is positive.

    Accepts a single vector or an (N, p) array; returns the same shape.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    first = np.argmax(pts != 0.0, axis=1)
    lead = pts[np.arange(len(pts)), first]
    flipped = np.where(lead < 0.0, -1.0, 1.0)
    out = pts * flipped[:, None]
    return out[0] if single else out


def check_unit(x, tol=UNIT_NORM_TOL):
    """Validate that all rows have unit norm within tol."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    err = np.abs(np.linalg.norm(x, axis=1) - 1.0)
    if np.any(err > tol):
        raise ValueError(f"direction norm deviates from 1 by {err.max():.3e}")


def angles_to_unit(angles, convention="elevation_last"):
    """Map p-1 spherical angles in [0, pi) to a unit vector of dimension p.

    Supports a single angle vector (shape (p-1,)) or a batch (N, p-1).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    a = np.atleast_2d(np.asarray(angles, dtype=float))
    if convention == "elevation_first":
        a = a[:, ::-1]
    n, q = a.shape
    p = q + 1
    out = np.empty((n, p))
    # nested construction: start from the innermost circle and wrap each
    # additional angle around it
    out[:, 0] = np.cos(a[:, 0])
    out[:, 1] = np.sin(a[:, 0])
    for j in range(1, q):
        out[:, : j + 1] *= np.cos(a[:, j])[:, None]
        out[:, j + 1] = np.sin(a[:, j])
    return out[0] if np.ndim(angles) == 1 else out


def unit_to_angles(x, convention="elevation_last"):
    """Invert angles_to_unit, returning angles in [0, pi).

    The input is interpreted as an axis: vectors are first flipped into the
    hemisphere covered by the parameterization (last nonzero coordinate
    positive), which leaves the represented direction unchanged.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    n, p = pts.shape
    if p < 2:
        raise ValueError("dimension must be at least 2")
    # flip into the hemisphere whose last nonzero coordinate is positive
    rev_first = (p - 1) - np.argmax(pts[:, ::-1] != 0.0, axis=1)
    lead = pts[np.arange(n), rev_first]
    v = pts * np.where(lead < 0.0, -1.0, 1.0)[:, None]

    ang = np.zeros((n, p - 1))
    for j in range(p - 2, 0, -1):
        s = np.clip(v[:, j + 1], -1.0, 1.0)
        base = np.arcsin(np.abs(s))
        # sign of cos a_j must match the last nonzero coordinate of the
        # remaining prefix so the inner recursion stays in range
        prefix = v[:, : j + 1]
        rev = j - np.argmax(prefix[:, ::-1] != 0.0, axis=1)
        csign = np.where(prefix[np.arange(n), rev] < 0.0, -1.0, 1.0)
        all_zero = ~np.any(prefix != 0.0, axis=1)
        csign[all_zero] = 1.0
        ang[:, j] = np.where(csign < 0.0, np.pi - base, base)
        c = csign * np.sqrt(np.maximum(0.0, 1.0 - s * s))
        safe = np.abs(c) > 0.0
        v[safe, : j + 1] /= c[safe, None]
        v[~safe, : j + 1] = 0.0
    ang[:, 0] = np.mod(np.arctan2(v[:, 1], v[:, 0]), np.pi)
    # vectors that collapsed to zero prefix give arbitrary inner angles; 0 is fine
    ang[:, 0] = np.where(np.any(v[:, :2] != 0.0, axis=1), ang[:, 0], 0.0)
    if convention == "elevation_first":
        ang = ang[:, ::-1]
    return ang[0] if np.ndim(x) == 1 else ang


def angle_area_element(angles, convention="elevation_last"):
    """Surface area element of the hemisphere in spherical coordinates.

    For nested angles a (elevation-last order) the element is
    prod_{j=2}^{p-1} |cos a_j|^(j-1); for p=2 it is identically 1.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    a = np.atleast_2d(np.asarray(angles, dtype=float))
    if convention == "elevation_first":
        a = a[:, ::-1]
    q = a.shape[1]
    out = np.ones(a.shape[0])
    for j in range(1, q):
        out *= np.abs(np.cos(a[:, j])) ** j
    return out[0] if np.ndim(angles) == 1 else out
