"""Random generation of directional Laplacian data.

1-D directions (p=2) come from inverting a tabulated CDF of the angular
density.  Higher dimensions quantize the spherical-angle box [0, pi)^(p-1)
into blocks, weight each block by density times the spherical area element,
draw multinomial block counts and place points uniformly inside their
block.  Output directions are always canonical unit vectors and the whole
procedure is deterministic given the seed.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import geometry, special
from .dld import AngularDataset, DldParams

CDF_GRID_SIZE = 4096
DEFAULT_BLOCKS = 360


def spherical_to_unit(angles, convention="elevation_last"):
    """Unit vector(s) from p-1 spherical angles in [0, pi)."""
    a = np.asarray(angles, dtype=float)
    if np.any((a < 0) | (a >= np.pi)):
        raise ValueError("angles must lie in [0, pi)")
    return geometry.angles_to_unit(a, convention)


def unit_to_spherical(x, convention="elevation_last"):
    """Spherical angles in [0, pi) for unit axis/axes x."""
    return geometry.unit_to_angles(x, convention)


def _pdf_1d(theta, m, k):
    c = special.normalization_constant(2, k)
    return c * np.exp(-k * np.abs(np.sin(theta - m)))


def sample_dld_1d(m, k, n, seed, grid_size=CDF_GRID_SIZE):
    """n angles in [0, pi) from the 1-D directional Laplacian.

    CDF tabulated on a uniform grid and inverted by monotone (linear)
    interpolation of uniform variates.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 0:
        raise ValueError("k must be >= 0")
    m = float(np.mod(m, np.pi))
    theta = np.linspace(0.0, np.pi, grid_size)
    pdf = _pdf_1d(theta, m, k)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(theta))])
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    u = rng.random(int(n))
    return np.interp(u, cdf, theta)


def sample_dld(params, n, seed, blocks=DEFAULT_BLOCKS):
    """AngularDataset of n draws from a directional Laplacian of any p >= 2.

    blocks is the per-axis resolution of the angle grid; total block count
    grows as blocks^(p-1), so high dimensions warrant a smaller value (a
    warning reminds about the cost for p > 3).
    """
    if not isinstance(params, DldParams):
        raise TypeError("params must be a DldParams")
    if n < 1:
        raise ValueError("n must be >= 1")
    p = params.p
    if p > 3:
        warnings.warn(
            f"block sampling in p={p} uses {blocks}^{p - 1} blocks; "
            "consider lowering `blocks`",
            stacklevel=2,
        )
    edges = (np.arange(blocks) + 0.5) * (np.pi / blocks)
    grids = np.meshgrid(*([edges] * (p - 1)), indexing="ij")
    centres = np.stack([g.ravel() for g in grids], axis=1)

    x = geometry.angles_to_unit(centres, "elevation_last")
    t = np.clip(x @ params.mean, -1.0, 1.0)
    dens = np.exp(-params.k * np.sqrt(1.0 - t * t))
    weight = dens * geometry.angle_area_element(centres, "elevation_last")
    weight /= weight.sum()

    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(n), weight)
    occupied = np.nonzero(counts)[0]
    block_idx = np.repeat(occupied, counts[occupied])
    corner = centres[block_idx] - 0.5 * (np.pi / blocks)
    angles = corner + rng.random((int(n), p - 1)) * (np.pi / blocks)
    pts = geometry.angles_to_unit(angles, "elevation_last")
    return AngularDataset(geometry.normalize_rows(pts))
