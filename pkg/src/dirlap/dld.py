"""Directional Laplacian distribution: density and maximum-likelihood fit.

The density on the half-unit (p-1)-sphere is

    p(x) = c_p(k) * exp(-k * sqrt(1 - (m.x)^2))

with unit mean axis m and concentration k >= 0.  The ML fit alternates a
gradient-ascent step on m (renormalized back to the sphere) with an exact
update of k obtained by inverting the concentration-ratio equation

    I_{p-1}(k)/I_{p-2}(k) = (1/N) sum_n sqrt(1 - (m.x_n)^2)

through the lookup table from dirlap.special.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry, special
from .backends import kernels


@dataclass(frozen=True)
class DldParams:
    """One directional Laplacian: unit mean axis, concentration, dimension."""

    mean: np.ndarray
    k: float
    p: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        if mean.ndim != 1 or len(mean) != self.p:
            raise ValueError(f"mean must be a vector of length p={self.p}")
        if self.p < 2:
            raise ValueError("dimension p must be >= 2")
        geometry.check_unit(mean)
        if not (0.0 <= self.k <= special.K_MAX):
            raise ValueError(f"k must lie in [0, {special.K_MAX}], got {self.k}")
        object.__setattr__(self, "mean", geometry.canonicalize(mean))
        object.__setattr__(self, "k", float(self.k))

    def to_dict(self):
        return {"type": "dld", "p": self.p, "mean": self.mean.tolist(), "k": self.k}

    @classmethod
    def from_dict(cls, d):
        return cls(mean=np.asarray(d["mean"], dtype=float), k=float(d["k"]), p=int(d["p"]))

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class AngularDataset:
    """N unit directions of common dimension p, stored canonically.

    Construction normalizes nothing: rows must already be unit vectors
    (within 1e-9); they are flipped to canonical half-sphere form.
    """

    def __init__(self, points):
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
        if pts.size == 0:
            raise ValueError("dataset must contain at least one point")
        if pts.ndim != 2 or pts.shape[1] < 2:
            raise ValueError("dataset must be (N, p) with p >= 2")
        geometry.check_unit(pts)
        self.points = np.ascontiguousarray(geometry.canonicalize(pts))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def p(self):
        return self.points.shape[1]

    def to_csv(self, path):
        np.savetxt(path, self.points, delimiter=",", fmt="%.17e")

    @classmethod
    def from_csv(cls, path):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # empty files raise below instead
            pts = np.loadtxt(path, delimiter=",", ndmin=2)
        if pts.size == 0:
            raise ValueError(f"no data rows in {path}")
        return cls(pts)


def as_points(data):
    """Accept an AngularDataset or a raw (N, p) array of unit rows."""
    if isinstance(data, AngularDataset):
        return data.points
    return AngularDataset(data).points


@dataclass
class FitConfig:
    """Shared knobs for the single fit and the mixture EM.

    tol / max_iter default per algorithm when left as None (single fit:
    1e-8 / 1000; mixture EM: 1e-6 / 500).  The seed drives every stochastic
    choice (K-means seeding); restarts > 0 reruns the mixture EM with
    distinct seeding and keeps the best likelihood.
    """

    eta: float = 0.01
    tol: float | None = None
    max_iter: int | None = None
    seed: int = 0
    k_init: float = 15.0
    restarts: int = 0
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-6
    kmeans_quantile: float = 0.95

    @classmethod
    def from_file(cls, path):
        path = str(path)
        if path.endswith(".toml"):
            try:
                import tomllib  # Python >= 3.11
            except ImportError:
                import tomli as tomllib
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        else:
            with open(path) as fh:
                raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown fit-config fields: {sorted(unknown)}")
        return cls(**raw)


@dataclass
class FitResult:
    params: DldParams
    converged: bool
    n_iter: int
    log_likelihood: float


def _check_dim(params, pts):
    if pts.shape[1] != params.p:
        raise ValueError(
            f"dimension mismatch: data has p={pts.shape[1]}, params p={params.p}"
        )


def dld_log_pdf(params, x):
    """Log density at one direction or a batch of directions."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    _check_dim(params, pts)
    t = np.clip(pts @ params.mean, -1.0, 1.0)
    s = np.sqrt(1.0 - t * t)
    out = special.log_normalization_constant(params.p, params.k) - params.k * s
    return float(out[0]) if np.ndim(x) == 1 else out


def dld_pdf(params, x):
    """Density at one direction or a batch of directions."""
    return np.exp(dld_log_pdf(params, x))


def dld_log_likelihood(params, data):
    """Joint log likelihood N*log c_p(k) - k * sum_n sqrt(1-(m.x_n)^2)."""
    pts = as_points(data)
    _check_dim(params, pts)
    s = kernels.axial_sin(pts, params.mean[None, :])[:, 0]
    logc = special.log_normalization_constant(params.p, params.k)
    return float(len(pts) * logc - params.k * s.sum())


def log_likelihood_mean_gradient(params, data):
    """Analytic gradient of the log likelihood with respect to the mean.

    Equals k * sum_n (t_n / sqrt(1-t_n^2)) x_n with t_n = m.x_n; the
    near-axis singularity is floored as in the fitting kernels.
    """
    pts = as_points(data)
    _check_dim(params, pts)
    ones = np.ones((len(pts), 1))
    _, _, grad = kernels.weighted_moments(pts, params.mean[None, :], ones)
    return params.k * grad[0]


def _init_mean(pts):
    # dominant eigenvector of the scatter matrix; antipodally robust
    _, vecs = np.linalg.eigh(pts.T @ pts)
    return geometry.canonicalize(vecs[:, -1])


def fit_dld(data, config=None, table=None):
    """Maximum-likelihood fit of a single directional Laplacian.

    Alternates one ascent step on the mean with the ratio inversion for k
    until the log likelihood stabilizes.  Returns a FitResult whose
    converged flag is False if the iteration cap was hit.
    """
    pts = as_points(data)
    n, p = pts.shape
    cfg = config or FitConfig()
    tol = 1e-8 if cfg.tol is None else cfg.tol
    max_iter = 1000 if cfg.max_iter is None else cfg.max_iter
    if n < p:
        warnings.warn(
            f"fitting {p}-dimensional model on only {n} points", stacklevel=2
        )
    if table is None:
        table = special.default_k_lookup(p)

    mean = _init_mean(pts)
    k = float(np.clip(cfg.k_init, special.K_MIN, special.K_MAX))
    ones = np.ones((n, 1))
    ll_prev = None
    ll = -np.inf
    n_iter = 0
    converged = False
    for n_iter in range(1, max_iter + 1):
        _, _, grad = kernels.weighted_moments(pts, mean[None, :], ones)
        mean = mean + cfg.eta * grad[0]
        mean /= np.linalg.norm(mean)
        s = kernels.axial_sin(pts, mean[None, :])[:, 0]
        k = float(special.invert_ratio(table, s.mean()))
        ll = n * special.log_normalization_constant(p, k) - k * s.sum()
        if ll_prev is not None and abs(ll - ll_prev) <= tol * abs(ll_prev):
            converged = True
            break
        ll_prev = ll
    params = DldParams(mean=geometry.canonicalize(mean), k=k, p=p)
    return FitResult(
        params=params, converged=converged, n_iter=n_iter, log_likelihood=float(ll)
    )
