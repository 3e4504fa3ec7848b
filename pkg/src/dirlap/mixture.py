"""Mixtures of directional Laplacians: EM training and K-means seeding.

The mixture density is p(x) = sum_i a_i c_p(k_i) exp(-k_i sqrt(1-(m_i.x)^2)).
Training is generalized EM: exact posterior/weight updates, one gradient
step per mean per iteration, and an exact concentration update from the
responsibility-weighted ratio.  Means are initialized with a directional
K-means built on the axial distance D_l(x, m) = sqrt(1 - (m.x)^2).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import geometry, special
from .backends import kernels
from .dld import AngularDataset, DldParams, FitConfig, as_points

STARVATION_FRACTION = 1e-8


@dataclass(frozen=True)
class DldMixture:
    """Weighted mixture of directional Laplacians sharing dimension p."""

    weights: np.ndarray
    means: np.ndarray
    ks: np.ndarray
    p: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        m = np.ascontiguousarray(np.asarray(self.means, dtype=float))
        k = np.asarray(self.ks, dtype=float)
        if m.ndim != 2 or m.shape[1] != self.p:
            raise ValueError("means must be (K, p)")
        if w.shape != (m.shape[0],) or k.shape != (m.shape[0],):
            raise ValueError("weights, means and ks must agree on K")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        geometry.check_unit(m)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", np.ascontiguousarray(geometry.canonicalize(m)))
        object.__setattr__(self, "ks", k)

    @property
    def n_components(self):
        return len(self.weights)

    def component(self, i):
        return DldParams(mean=self.means[i], k=float(self.ks[i]), p=self.p)

    def log_weighted_constants(self):
        """log(a_i c_p(k_i)) per component; -inf for zero weights."""
        out = np.empty(self.n_components)
        for i in range(self.n_components):
            logc = special.log_normalization_constant(self.p, float(self.ks[i]))
            w = self.weights[i]
            out[i] = np.log(w) + logc if w > 0 else -np.inf
        return out

    def to_dict(self):
        return {
            "type": "dld_mixture",
            "p": self.p,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "ks": self.ks.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            weights=np.asarray(d["weights"], dtype=float),
            means=np.asarray(d["means"], dtype=float),
            ks=np.asarray(d["ks"], dtype=float),
            p=int(d["p"]),
        )

    def to_json(self, path, diagnostics=None):
        payload = self.to_dict()
        if diagnostics is not None:
            payload["diagnostics"] = diagnostics
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class MixtureFitResult:
    model: DldMixture
    converged: bool
    n_iter: int
    log_likelihood: float
    marginal_log_likelihood: float
    starved: list = field(default_factory=list)


def mixture_log_pdf(model, x):
    """Log of the mixture density at one direction or a batch."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    if pts.shape[1] != model.p:
        raise ValueError(
            f"dimension mismatch: data has p={pts.shape[1]}, model p={model.p}"
        )
    s = kernels.axial_sin(pts, model.means)
    logd = model.log_weighted_constants()[None, :] - model.ks[None, :] * s
    peak = logd.max(axis=1, keepdims=True)
    out = peak[:, 0] + np.log(np.exp(logd - peak).sum(axis=1))
    return float(out[0]) if np.ndim(x) == 1 else out


def mixture_pdf(model, x):
    """Mixture density at one direction or a batch."""
    return np.exp(mixture_log_pdf(model, x))


def e_step(model, data):
    """Posterior responsibilities p(i|x_n) as an (N, K) row-stochastic array."""
    pts = as_points(data)
    if pts.shape[1] != model.p:
        raise ValueError("dimension mismatch between data and model")
    resp, _, _ = kernels.responsibilities(
        pts, model.means, model.ks, model.log_weighted_constants()
    )
    return resp


def m_step(model, data, resp, config=None, table=None):
    """One generalized M-step: weights, one mean ascent step, exact k.

    Components whose total responsibility falls below a starvation floor
    are frozen in place and reported via the second return value.
    """
    pts = as_points(data)
    cfg = config or FitConfig()
    n, p = pts.shape
    resp = np.ascontiguousarray(np.asarray(resp, dtype=float))
    if resp.shape != (n, model.n_components):
        raise ValueError("responsibility matrix shape does not match data/model")
    if table is None:
        table = special.default_k_lookup(p)

    r_sum, _, grad = kernels.weighted_moments(pts, model.means, resp)
    weights = r_sum / n
    starved = np.nonzero(r_sum < STARVATION_FRACTION * n)[0]
    live = np.setdiff1d(np.arange(model.n_components), starved)

    means = model.means.copy()
    means[live] += cfg.eta * model.ks[live, None] * grad[live]
    means /= np.linalg.norm(means, axis=1, keepdims=True)
    means = geometry.canonicalize(means)

    s_new = kernels.axial_sin(pts, np.ascontiguousarray(means))
    ks = model.ks.copy()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", special.RatioClampWarning)
        for i in live:
            ratio = float((resp[:, i] * s_new[:, i]).sum() / r_sum[i])
            ks[i] = special.invert_ratio(table, ratio)

    updated = DldMixture(weights=weights, means=means, ks=ks, p=p)
    return updated, list(starved)


def fit_mixture(data, n_components, config=None, table=None, init_means=None):
    """EM fit of a directional Laplacian mixture.

    Means start from directional K-means (or from init_means when given),
    concentrations from config.k_init, weights uniform.  Stops when the
    relative change of the simplified likelihood drops below tol (default
    1e-6) or after max_iter iterations (default 500).  With
    config.restarts > 0 the whole EM is rerun under fresh seeding and the
    best marginal likelihood wins.
    """
    pts = as_points(data)
    n, p = pts.shape
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    if n < n_components:
        raise ValueError(f"need at least {n_components} points, got {n}")
    cfg = config or FitConfig()
    if table is None:
        table = special.default_k_lookup(p)

    best = None
    for attempt in range(cfg.restarts + 1):
        seed = cfg.seed if attempt == 0 else (cfg.seed, attempt)
        result = _fit_mixture_once(pts, n_components, cfg, table, seed, init_means)
        if best is None or result.marginal_log_likelihood > best.marginal_log_likelihood:
            best = result
    return best


def _fit_mixture_once(pts, n_components, cfg, table, seed, init_means=None):
    n, p = pts.shape
    tol = 1e-6 if cfg.tol is None else cfg.tol
    max_iter = 500 if cfg.max_iter is None else cfg.max_iter

    if init_means is not None:
        means = np.ascontiguousarray(np.asarray(init_means, dtype=float))
        if means.shape != (n_components, p):
            raise ValueError("init_means must be (n_components, p)")
        geometry.check_unit(means)
    else:
        rng = np.random.default_rng(seed)
        means = directional_kmeans(pts, n_components, cfg, rng=rng)
    k0 = float(np.clip(cfg.k_init, special.K_MIN, special.K_MAX))
    model = DldMixture(
        weights=np.full(n_components, 1.0 / n_components),
        means=means,
        ks=np.full(n_components, k0),
        p=p,
    )

    ll_prev = None
    starved_flags: set[int] = set()
    n_iter = 0
    converged = False
    for n_iter in range(1, max_iter + 1):
        resp, simplified, _ = kernels.responsibilities(
            pts, model.means, model.ks, model.log_weighted_constants()
        )
        model, starved = m_step(model, pts, resp, cfg, table)
        starved_flags.update(int(i) for i in starved)
        if ll_prev is not None and abs(simplified - ll_prev) <= tol * abs(ll_prev):
            converged = True
            break
        ll_prev = simplified
    # likelihood readings for the returned (post-update) model
    _, simplified, marginal = kernels.responsibilities(
        pts, model.means, model.ks, model.log_weighted_constants()
    )
    return MixtureFitResult(
        model=model,
        converged=converged,
        n_iter=n_iter,
        log_likelihood=float(simplified),
        marginal_log_likelihood=float(marginal),
        starved=sorted(starved_flags),
    )


def axial_distance(x, centres):
    """D_l(x, m) = sqrt(1 - (m.x)^2): pi-periodic, 0 iff x = +-m."""
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    centres = np.ascontiguousarray(np.atleast_2d(np.asarray(centres, dtype=float)))
    return kernels.axial_sin(x, centres)


def directional_kmeans(data, n_clusters, config=None, rng=None):
    """Lloyd iteration under the axial distance D_l.

    Centres are seeded with an outlier-robust farthest-point rule: after a
    random first pick, each next seed is the point whose distance to the
    chosen set sits at the config quantile of the distance distribution
    (taking the plain maximum would chase stray outliers).  Cluster means
    are computed after flipping members into the hemisphere of the current
    centre, so antipodal representatives reinforce instead of cancelling.
    Empty clusters are re-seeded at the point farthest from all centres.
    """
    pts = as_points(data)
    n, p = pts.shape
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    if n < n_clusters:
        raise ValueError(f"need at least {n_clusters} points, got {n}")
    cfg = config or FitConfig()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    centres = pts[_robust_farthest_seeds(pts, n_clusters, rng, cfg.kmeans_quantile)].copy()
    for _ in range(cfg.kmeans_max_iter):
        dist = axial_distance(pts, centres)
        labels = np.argmin(dist, axis=1)
        new_centres = np.empty_like(centres)
        for i in range(n_clusters):
            members = pts[labels == i]
            if len(members) == 0:
                far = int(np.argmax(dist.min(axis=1)))
                new_centres[i] = pts[far]
                continue
            aligned = members * np.where(members @ centres[i] < 0, -1.0, 1.0)[:, None]
            total = aligned.sum(axis=0)
            norm = np.linalg.norm(total)
            new_centres[i] = total / norm if norm > 0 else centres[i]
        movement = axial_distance(new_centres, centres).diagonal().max()
        centres = new_centres
        if movement < cfg.kmeans_tol:
            break
    return geometry.canonicalize(centres)


def _robust_farthest_seeds(pts, n_clusters, rng, quantile):
    idx = [int(rng.integers(len(pts)))]
    for _ in range(n_clusters - 1):
        d2 = np.min(1.0 - (pts @ pts[idx].T) ** 2, axis=1)
        threshold = np.quantile(d2, quantile)
        candidates = np.nonzero(d2 >= threshold)[0]
        # median of the far candidates: beyond the threshold (unlike the
        # nearest candidate, which tends to straddle basin boundaries) but
        # not the extreme point (which tends to be an outlier)
        order = candidates[np.argsort(d2[candidates])]
        idx.append(int(order[len(order) // 2]))
    return idx
