"""Separation scores, goodness-of-fit, and the von Mises-Fisher baseline.

The BSS scores use time-invariant orthogonal projections over the whole
signal: each estimate splits into a target part (projection onto its
matched reference), interference (projection onto the span of all
references minus the target) and artifacts (the remainder).  This is a
deliberately simplified stand-in for filter-based toolboxes, so absolute
dB values are comparable only within this implementation.

The von Mises-Fisher baseline uses the classical modified Bessel function
(scipy's iv/ive), which is unrelated to the exponential-sine integrals in
dirlap.special.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ive

from . import geometry
from .dld import as_points
from .sampling import unit_to_spherical

VMF_KAPPA_MAX = 1e3


@dataclass
class SeparationScores:
    """Per-source SDR/SIR/SAR in dB plus the estimate->reference matching."""

    sdr: np.ndarray
    sir: np.ndarray
    sar: np.ndarray
    matching: list


_SENTINEL_EPS = 1e-20  # power ratios beyond this are numerically zero/infinite


def _ratio_db(num, den):
    if num <= 0.0:
        return -np.inf
    if den <= num * _SENTINEL_EPS:
        return np.inf
    return 10.0 * np.log10(num / den)


def bss_scores(estimates, references):
    """Orthogonal-projection SDR/SIR/SAR with greedy correlation matching.

    estimates and references are (L, n) arrays of equal shape; references
    must be nonzero.  Zero estimates score -inf across the board.
    """
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    ref = np.atleast_2d(np.asarray(references, dtype=float))
    if est.shape != ref.shape:
        raise ValueError("estimates and references must have matching shapes")
    n_src = est.shape[0]
    ref_norm = np.linalg.norm(ref, axis=1)
    if np.any(ref_norm == 0):
        raise ValueError("references must be nonzero")

    est_norm = np.linalg.norm(est, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.abs(est @ ref.T) / np.outer(np.where(est_norm > 0, est_norm, 1.0), ref_norm)
    corr[est_norm == 0] = -1.0

    matching = [-1] * n_src
    work = corr.copy()
    for _ in range(n_src):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        matching[i] = int(j)
        work[i, :] = -np.inf
        work[:, j] = -np.inf

    gram = ref @ ref.T
    sdr = np.empty(n_src)
    sir = np.empty(n_src)
    sar = np.empty(n_src)
    for i in range(n_src):
        e = est[i]
        j = matching[i]
        if est_norm[i] == 0:
            sdr[i] = sir[i] = sar[i] = -np.inf
            continue
        coeffs = np.linalg.lstsq(gram, ref @ e, rcond=None)[0]
        proj_all = coeffs @ ref
        target = (e @ ref[j] / gram[j, j]) * ref[j]
        interf = proj_all - target
        artif = e - proj_all
        pt = float(target @ target)
        pi_ = float(interf @ interf)
        pa = float(artif @ artif)
        sdr[i] = _ratio_db(pt, pi_ + pa)
        sir[i] = _ratio_db(pt, pi_)
        sar[i] = _ratio_db(pt + pi_, pa)
    return SeparationScores(sdr=sdr, sir=sir, sar=sar, matching=matching)


def _gauss_legendre_cells(edges, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    wts = half[:, None] * weights[None, :]
    return pts, wts


def pearson_chi_square(data, density, bins=None, quad_order=8, merge_floor=1e-12):
    """Pearson chi-square between an angular sample and a model density.

    density is a callable mapping (M, p) unit directions to half-sphere
    density values.  Data is binned over the spherical-angle box
    [0, pi)^(p-1) (72 bins for p=2, 36 per axis for p=3 by default);
    expected counts integrate density * area element per bin with a tensor
    Gauss rule.  Bins whose expected count falls below merge_floor are
    merged into their predecessor in flat scan order.
    """
    pts = as_points(data)
    n, p = pts.shape
    if p not in (2, 3):
        raise ValueError("chi-square binning supports p in {2, 3}")
    if bins is None:
        bins = 72 if p == 2 else 36
    edges = np.linspace(0.0, np.pi, bins + 1)
    ang = np.atleast_2d(unit_to_spherical(pts))

    if p == 2:
        observed = np.histogram(ang[:, 0], edges)[0].astype(float)
        gp, gw = _gauss_legendre_cells(edges, quad_order)
        dirs = geometry.angles_to_unit(gp.ravel()[:, None])
        vals = (density(dirs) * geometry.angle_area_element(gp.ravel()[:, None])).reshape(gp.shape)
        expected = (vals * gw).sum(axis=1)
    else:
        observed = np.histogram2d(ang[:, 0], ang[:, 1], bins=(edges, edges))[0].ravel()
        gp, gw = _gauss_legendre_cells(edges, quad_order)
        # tensor grid: cell (b1, b2) with nodes (u, v)
        A1 = gp[:, None, :, None]
        A2 = gp[None, :, None, :]
        W = gw[:, None, :, None] * gw[None, :, None, :]
        grid = np.stack(
            [np.broadcast_to(A1, W.shape).ravel(), np.broadcast_to(A2, W.shape).ravel()],
            axis=1,
        )
        dirs = geometry.angles_to_unit(grid)
        vals = density(dirs) * geometry.angle_area_element(grid)
        expected = (vals.reshape(W.shape) * W).sum(axis=(2, 3)).ravel()

    expected = expected * (n / expected.sum())

    # merge starved bins into their running neighbor
    obs_m, exp_m = [], []
    for o, e in zip(observed, expected):
        if exp_m and exp_m[-1] < merge_floor:
            obs_m[-1] += o
            exp_m[-1] += e
        else:
            obs_m.append(float(o))
            exp_m.append(float(e))
    obs_m = np.array(obs_m)
    exp_m = np.array(exp_m)
    ok = exp_m > 0
    return float(((obs_m[ok] - exp_m[ok]) ** 2 / exp_m[ok]).sum())


@dataclass(frozen=True)
class VmfParams:
    """Fitted von Mises-Fisher parameters (full-sphere model)."""

    mean: np.ndarray
    kappa: float
    p: int


def fit_vmf(data):
    """Moment estimate of a von Mises-Fisher fit on axial data.

    Half-sphere data feeds a full-sphere model, so points are first
    sign-aligned to the dominant scatter direction; the mean is the
    normalized resultant and kappa uses the resultant-length approximation
    kappa = rbar (p - rbar^2) / (1 - rbar^2), clamped to VMF_KAPPA_MAX.
    """
    pts = as_points(data)
    n, p = pts.shape
    _, vecs = np.linalg.eigh(pts.T @ pts)
    dominant = vecs[:, -1]
    aligned = pts * np.where(pts @ dominant < 0.0, -1.0, 1.0)[:, None]
    resultant = aligned.sum(axis=0)
    r_norm = np.linalg.norm(resultant)
    if r_norm == 0.0:
        return VmfParams(mean=geometry.canonicalize(dominant), kappa=0.0, p=p)
    mean = resultant / r_norm
    rbar = min(r_norm / n, 1.0 - 1e-12)
    kappa = rbar * (p - rbar**2) / (1.0 - rbar**2)
    return VmfParams(mean=mean, kappa=float(min(kappa, VMF_KAPPA_MAX)), p=p)


def vmf_half_log_density(params, x):
    """Log density of the fitted vMF folded onto the half-sphere.

    Folding adds the antipodal image: p(x) + p(-x) = 2 c_p(kappa)
    cosh(kappa m.x), a proper density on either hemisphere.  Computed in
    the log domain with scaled Bessel functions so large kappa is safe.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    p = params.p
    kappa = params.kappa
    t = pts @ params.mean
    if kappa < 1e-12:
        # uniform on the half-sphere
        from math import lgamma, log, pi

        out = np.full(len(pts), lgamma(p / 2) - (p / 2) * log(pi))
    else:
        from math import log, pi

        nu = p / 2 - 1
        log_iv = kappa + np.log(ive(nu, kappa))
        log_c = nu * np.log(kappa) - (p / 2) * np.log(2 * pi) - log_iv
        kt = kappa * np.abs(t)
        log_cosh = kt + np.log1p(np.exp(-2.0 * kt)) - np.log(2.0)
        out = np.log(2.0) + log_c + log_cosh
    return out[0] if np.ndim(x) == 1 else out


def vmf_half_density(params, x):
    """Folded vMF density on the half-sphere (linear scale)."""
    return np.exp(vmf_half_log_density(params, x))
