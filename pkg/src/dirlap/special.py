"""Special-function kernel for the directional Laplacian family.

The workhorse is the exponential-sine integral

    I_p(k) = (1/pi) * integral_0^pi exp(-k sin t) sin^p(t) dt

which plays the role the classical modified Bessel function plays for the
von Mises family (the classical Bessel I_nu is intentionally *not*
implemented here; the von Mises-Fisher baseline in dirlap.metrics uses
scipy's).  I_p builds the density normalization constant

    c_p(k) = Gamma((p-1)/2) / (pi^((p+1)/2) * I_{p-2}(k))

and the concentration-estimating ratio I_{p-1}(k)/I_{p-2}(k), a smooth
strictly decreasing function of k that is inverted through a precomputed
lookup table.
"""

from __future__ import annotations

import functools
import json
import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

K_MIN = 0.01
K_MAX = 30.0
DEFAULT_GRID_SIZE = 3000
LUT_FORMAT_VERSION = 1

_QUAD_ABS_TOL = 1e-12


class RatioClampWarning(UserWarning):
    """Raised (as a warning) when a concentration ratio is out of range.

    Happens for degenerate data: ratio 0 means every point sits exactly on
    the mean axis, ratio 1 or above means the data is flatter than the
    uniform limit allows.  The inversion clamps to the table endpoints
    instead of failing so iterative fits stay total.
    """


def bessel_like_integral(p, k):
    """Evaluate I_p(k) = (1/pi) * int_0^pi exp(-k sin t) sin^p t dt.

    Uses adaptive quadrature with absolute tolerance well below 1e-10;
    values are memoized since density evaluation hits the same (p, k)
    pair many times.  The result lies in (0, 1] and decreases in both p
    and k.
    """
    if p < 0 or int(p) != p:
        raise ValueError(f"order p must be a nonnegative integer, got {p}")
    if not np.isfinite(k) or k < 0:
        raise ValueError(f"concentration k must be finite and >= 0, got {k}")
    return _sine_integral_cached(int(p), float(k))


@functools.lru_cache(maxsize=65536)
def _sine_integral_cached(p, k):
    val, _ = quad(
        lambda t: math.exp(-k * math.sin(t)) * math.sin(t) ** p,
        0.0,
        math.pi,
        epsabs=_QUAD_ABS_TOL,
        epsrel=_QUAD_ABS_TOL,
        limit=200,
    )
    return val / math.pi


def gamma_function(x):
    """Gamma(x) for x > 0."""
    if not np.isfinite(x) or x <= 0:
        raise ValueError(f"gamma_function requires x > 0, got {x}")
    return math.gamma(x)


def normalization_constant(p, k):
    """Density normalization c_p(k) over the half-unit (p-1)-sphere."""
    if p < 2 or int(p) != p:
        raise ValueError(f"dimension p must be an integer >= 2, got {p}")
    p = int(p)
    return gamma_function((p - 1) / 2) / (
        math.pi ** ((p + 1) / 2) * bessel_like_integral(p - 2, k)
    )


def log_normalization_constant(p, k):
    """log c_p(k); preferred inside likelihood computations."""
    if p < 2 or int(p) != p:
        raise ValueError(f"dimension p must be an integer >= 2, got {p}")
    p = int(p)
    return (
        math.lgamma((p - 1) / 2)
        - (p + 1) / 2 * math.log(math.pi)
        - math.log(bessel_like_integral(p - 2, k))
    )


@dataclass(frozen=True)
class KLookupTable:
    """Precomputed map between concentration k and I_{p-1}(k)/I_{p-2}(k).

    k_grid is strictly increasing over [K_MIN, K_MAX]; ratio_grid is the
    matching strictly decreasing ratio in (0, 1).  Immutable and safe to
    share across threads.
    """

    dimension_p: int
    k_grid: np.ndarray
    ratio_grid: np.ndarray
    _inverse: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = np.asarray(self.k_grid, dtype=float)
        r = np.asarray(self.ratio_grid, dtype=float)
        if self.dimension_p < 2:
            raise ValueError("dimension_p must be >= 2")
        if k.ndim != 1 or k.shape != r.shape or len(k) < 2:
            raise ValueError("k_grid and ratio_grid must be matching 1-D arrays")
        if np.any(np.diff(k) <= 0):
            raise ValueError("k_grid must be strictly increasing")
        if np.any(np.diff(r) >= 0):
            raise ValueError("ratio_grid must be strictly decreasing")
        if r[-1] <= 0.0 or r[0] >= 1.0:
            raise ValueError("ratio values must lie in (0, 1)")
        object.__setattr__(self, "k_grid", k)
        object.__setattr__(self, "ratio_grid", r)
        # shape-preserving monotone cubic on (ratio ascending -> k)
        object.__setattr__(
            self, "_inverse", PchipInterpolator(r[::-1], k[::-1], extrapolate=False)
        )

    def ratio_at(self, k):
        """Interpolated ratio at concentration k (for diagnostics/tests)."""
        fwd = PchipInterpolator(self.k_grid, self.ratio_grid, extrapolate=False)
        return fwd(k)

    def to_json(self, path):
        payload = {
            "format_version": LUT_FORMAT_VERSION,
            "p": self.dimension_p,
            "k_grid": self.k_grid.tolist(),
            "ratio_grid": self.ratio_grid.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            payload = json.load(fh)
        version = payload.get("format_version")
        if version != LUT_FORMAT_VERSION:
            raise ValueError(f"unsupported lookup-table format version {version!r}")
        return cls(
            dimension_p=int(payload["p"]),
            k_grid=np.asarray(payload["k_grid"], dtype=float),
            ratio_grid=np.asarray(payload["ratio_grid"], dtype=float),
        )


def build_k_lookup(p, grid_size=DEFAULT_GRID_SIZE):
    """Tabulate the concentration ratio on a uniform k grid.

    grid_size >= 100 keeps interpolation error far below estimation noise.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be >= 100")
    if p < 2 or int(p) != p:
        raise ValueError(f"dimension p must be an integer >= 2, got {p}")
    p = int(p)
    k_grid = np.linspace(K_MIN, K_MAX, int(grid_size))
    hi = np.array([bessel_like_integral(p - 1, k) for k in k_grid])
    lo = np.array([bessel_like_integral(p - 2, k) for k in k_grid])
    return KLookupTable(dimension_p=p, k_grid=k_grid, ratio_grid=hi / lo)


def invert_ratio(table, ratio):
    """Concentration k whose ratio I_{p-1}/I_{p-2} matches the input.

    Accepts a scalar or array.  Ratios outside the tabulated range clamp
    to the nearest endpoint (k=K_MAX for small ratios, k=K_MIN for large
    ones); mathematically impossible ratios (<= 0 or >= 1) additionally
    emit a RatioClampWarning.
    """
    r = np.asarray(ratio, dtype=float)
    if np.any((r <= 0.0) | (r >= 1.0)):
        warnings.warn(
            "concentration ratio outside (0, 1); clamping to table range",
            RatioClampWarning,
            stacklevel=2,
        )
    lo, hi = table.ratio_grid[-1], table.ratio_grid[0]
    clipped = np.clip(r, lo, hi)
    k = np.asarray(table._inverse(clipped), dtype=float)
    k = np.where(r <= lo, table.k_grid[-1], k)
    k = np.where(r >= hi, table.k_grid[0], k)
    return float(k) if np.ndim(ratio) == 0 else k


_table_cache: dict[tuple[int, int], KLookupTable] = {}
_table_lock = threading.Lock()


def default_k_lookup(p, grid_size=DEFAULT_GRID_SIZE):
    """Process-wide cached lookup table for dimension p."""
    key = (int(p), int(grid_size))
    with _table_lock:
        table = _table_cache.get(key)
    if table is None:
        table = build_k_lookup(p, grid_size)
        with _table_lock:
            _table_cache[key] = table
    return table
