"""Underdetermined instantaneous source separation.

Stages: MDCT sparsification, projection of time-frequency points onto the
half-unit sphere of channel space, mixture fitting (the fitted means are
the mixing-column estimates), attribution of points to sources by hard
1-D boundaries or a soft density-ratio rule, and reconstruction of mono
sources or multichannel source images.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .. import geometry
from ..backends import kernels
from ..dld import AngularDataset, FitConfig
from ..mixture import DldMixture, fit_mixture
from .mdct import MdctFrame, frame_samples_for_ms, mdct_forward, mdct_inverse

DEFAULT_ENERGY_FLOOR = 1e-6
DEFAULT_SOFT_RATIO = 0.8


@dataclass(frozen=True)
class MixtureSignals:
    """Equal-length sensor signals, shape (channels, samples)."""

    channels: np.ndarray
    sample_rate: float

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.channels, dtype=float))
        if data.shape[0] < 2:
            raise ValueError("need at least two channels")
        if not np.all(np.isfinite(data)):
            raise ValueError("signals must be finite")
        object.__setattr__(self, "channels", data)

    @property
    def n_channels(self):
        return self.channels.shape[0]

    @property
    def n_samples(self):
        return self.channels.shape[1]


@dataclass(frozen=True)
class SphereProjection:
    """Active time-frequency points mapped to directions.

    directions: (M, K) canonical unit vectors; indices: flat positions in
    the (F*T) coefficient grid; magnitudes: channel norms at those points.
    """

    directions: np.ndarray
    indices: np.ndarray
    magnitudes: np.ndarray
    grid_shape: tuple

    @property
    def dataset(self):
        return AngularDataset(self.directions)


@dataclass(frozen=True)
class AttributionSets:
    """Per-source index sets over the flat time-frequency grid."""

    sets: list
    mode: str
    q: float | None = None


def project_to_sphere(frame, energy_floor):
    """Directions x/||x|| of the time-frequency points above the floor.

    energy_floor is an absolute threshold on the channel norm; points
    below it are excluded (they keep no direction and no attribution).
    """
    if frame.n_channels < 2:
        raise ValueError("projection needs at least two channels")
    flat = frame.coefficients.reshape(frame.n_channels, -1)
    norms = np.linalg.norm(flat, axis=0)
    active = np.nonzero(norms >= max(energy_floor, 0.0))[0]
    if active.size == 0:
        raise ValueError("all time-frequency points fall below the energy floor")
    directions = geometry.canonicalize(flat[:, active].T / norms[active][:, None])
    return SphereProjection(
        directions=np.ascontiguousarray(directions),
        indices=active,
        magnitudes=norms[active],
        grid_shape=frame.grid_shape,
    )


def _mean_angles(model):
    return np.mod(np.arctan2(model.means[:, 1], model.means[:, 0]), np.pi)


def _weighted_log_density_1d(model, order, angles):
    lwc = model.log_weighted_constants()
    out = np.empty((np.size(angles), len(order)))
    a = np.atleast_1d(angles)
    for col, i in enumerate(order):
        theta = np.mod(np.arctan2(model.means[i, 1], model.means[i, 0]), np.pi)
        out[:, col] = lwc[i] - model.ks[i] * np.abs(np.sin(a - theta))
    return out


def hard_boundaries_1d(model):
    """Angles where adjacent weighted component densities intersect.

    Components are taken in circular order of their mean angles (period
    pi); each boundary is located by bisection of the log-density
    difference on the arc between the two adjacent means, including the
    wrap-around arc.  If one component dominates the whole arc the
    boundary collapses onto the weaker end; identical components get the
    arc midpoint.  Returns (order, boundaries) with boundaries[j] on the
    arc after order[j].
    """
    if model.p != 2:
        raise ValueError("hard 1-D boundaries require p=2")
    angles = _mean_angles(model)
    order = np.argsort(angles)
    k = len(order)
    lwc = model.log_weighted_constants()

    def logdiff(phi, i, j):
        ti = angles[i]
        tj = angles[j]
        di = lwc[i] - model.ks[i] * abs(np.sin(phi - ti))
        dj = lwc[j] - model.ks[j] * abs(np.sin(phi - tj))
        return di - dj

    bounds = np.empty(k)
    for pos in range(k):
        i = order[pos]
        j = order[(pos + 1) % k]
        lo = angles[i]
        hi = angles[j] if pos + 1 < k else angles[j] + np.pi
        if hi - lo < 1e-15:
            bounds[pos] = lo
            continue
        flo = logdiff(lo, i, j)
        fhi = logdiff(hi, i, j)
        if flo == 0.0 and fhi == 0.0:
            bounds[pos] = 0.5 * (lo + hi)
            continue
        if flo <= 0.0:
            bounds[pos] = lo
            continue
        if fhi >= 0.0:
            bounds[pos] = hi
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = logdiff(mid, i, j)
            if fm > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13:
                break
        bounds[pos] = 0.5 * (lo + hi)
    return order, bounds


def attribute_hard_1d(model, projection):
    """Partition active points by the 1-D intersection boundaries."""
    order, bounds = hard_boundaries_1d(model)
    phi = np.mod(np.arctan2(projection.directions[:, 1], projection.directions[:, 0]), np.pi)
    cuts = np.sort(np.mod(bounds, np.pi))
    # owner of each arc segment: strongest weighted density at its midpoint
    ext = np.concatenate([cuts, [cuts[0] + np.pi]])
    mids = np.mod(0.5 * (ext[:-1] + ext[1:]), np.pi)
    dens = _weighted_log_density_1d(model, np.arange(model.n_components), mids)
    owners = np.argmax(dens, axis=1)
    seg = (np.searchsorted(cuts, phi, side="right") - 1) % len(cuts)
    labels = owners[seg]
    sets = [projection.indices[labels == i] for i in range(model.n_components)]
    return AttributionSets(sets=sets, mode="hard")


def attribute_soft(model, projection, q=DEFAULT_SOFT_RATIO, rule="per_component"):
    """Density-ratio membership: point n joins source i when its component
    density keeps at least the fraction (1-q) of that component's peak.

    rule="per_component" tests exp(-k_i * s_ni) >= 1-q (the component's own
    density profile); rule="mixture" tests the full mixture density against
    (1-q) * a_i * c_p(k_i).  Sets may overlap; points matching no component
    fall back to their maximum-responsibility component.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    x = projection.directions
    s = kernels.axial_sin(x, model.means)
    lwc = model.log_weighted_constants()
    if rule == "per_component":
        member = np.exp(-model.ks[None, :] * s) >= (1.0 - q)
    elif rule == "mixture":
        logd = lwc[None, :] - model.ks[None, :] * s
        peak = logd.max(axis=1, keepdims=True)
        logmix = peak[:, 0] + np.log(np.exp(logd - peak).sum(axis=1))
        member = logmix[:, None] >= np.log(1.0 - q) + lwc[None, :]
    else:
        raise ValueError(f"unknown soft attribution rule {rule!r}")
    orphan = ~member.any(axis=1)
    if np.any(orphan):
        logd = lwc[None, :] - model.ks[None, :] * s[orphan]
        member[np.nonzero(orphan)[0], np.argmax(logd, axis=1)] = True
    sets = [projection.indices[member[:, i]] for i in range(model.n_components)]
    return AttributionSets(sets=sets, mode="soft", q=q)


def reconstruct_sources(frame, sets, model):
    """Mono source estimates u_i = m_i . x on each source's index set.

    Coefficients outside S_i stay exactly zero; each plane is inverted
    back to the time domain.  Returns (L, n_samples).
    """
    flat = frame.coefficients.reshape(frame.n_channels, -1)
    out = []
    for i, idx in enumerate(sets.sets):
        plane = np.zeros(flat.shape[1])
        if len(idx):
            plane[idx] = model.means[i] @ flat[:, idx]
        mono = MdctFrame(
            coefficients=plane.reshape((1,) + frame.grid_shape),
            frame_length=frame.frame_length,
            sample_rate=frame.sample_rate,
            n_samples=frame.n_samples,
        )
        out.append(mdct_inverse(mono)[0])
    return np.array(out)


def reconstruct_source_images(frame, sets):
    """Multichannel images: copy the full coefficient vector on each S_i.

    When the sets partition the active points, the images plus the
    floor-excluded residual add up to the input mixture coefficients.
    Returns a list of (channels, n_samples) arrays.
    """
    flat = frame.coefficients.reshape(frame.n_channels, -1)
    images = []
    for idx in sets.sets:
        plane = np.zeros_like(flat)
        if len(idx):
            plane[:, idx] = flat[:, idx]
        multi = MdctFrame(
            coefficients=plane.reshape(frame.coefficients.shape),
            frame_length=frame.frame_length,
            sample_rate=frame.sample_rate,
            n_samples=frame.n_samples,
        )
        images.append(mdct_inverse(multi))
    return images


@dataclass
class SeparationConfig:
    """Pipeline parameters; fit controls nest a FitConfig."""

    frame_length: int | None = None
    frame_ms: float | None = None
    mode: str = "auto"  # auto: hard for 2 channels, soft otherwise
    q: float = DEFAULT_SOFT_RATIO
    soft_rule: str = "per_component"
    energy_floor: float = DEFAULT_ENERGY_FLOOR  # relative to max point norm
    images: bool = False
    fit: FitConfig = field(default_factory=FitConfig)

    def resolve_frame_length(self, sample_rate):
        if self.frame_length is not None:
            return int(self.frame_length)
        ms = 32.0 if self.frame_ms is None else float(self.frame_ms)
        return frame_samples_for_ms(ms, sample_rate)


@dataclass
class SeparationResult:
    sources: np.ndarray
    model: DldMixture
    attribution: AttributionSets
    report: dict
    images: list | None = None


def separate(signals, n_sources, config=None):
    """Full pipeline from sensor signals to separated sources.

    signals may be a MixtureSignals or ((channels, samples) array,
    sample_rate is then required inside MixtureSignals).  n_sources is the
    number of mixture components fitted and sources reconstructed.
    """
    if not isinstance(signals, MixtureSignals):
        raise TypeError("signals must be a MixtureSignals")
    cfg = config or SeparationConfig()
    if n_sources < 1:
        raise ValueError("n_sources must be >= 1")

    timings = {}
    t_total = time.perf_counter()

    t0 = time.perf_counter()
    frame_length = cfg.resolve_frame_length(signals.sample_rate)
    frame = mdct_forward(signals.channels, frame_length, signals.sample_rate)
    timings["mdct_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    flat_norm = np.linalg.norm(frame.coefficients.reshape(frame.n_channels, -1), axis=0)
    floor = cfg.energy_floor * flat_norm.max()
    projection = project_to_sphere(frame, floor)
    timings["projection_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    fit = fit_mixture(projection.directions, n_sources, cfg.fit)
    model = fit.model
    timings["fit_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    mode = cfg.mode
    if mode == "auto":
        mode = "hard" if signals.n_channels == 2 else "soft"
    if mode == "hard":
        attribution = attribute_hard_1d(model, projection)
    elif mode == "soft":
        attribution = attribute_soft(model, projection, cfg.q, cfg.soft_rule)
    else:
        raise ValueError(f"unknown attribution mode {cfg.mode!r}")
    timings["attribution_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sources = reconstruct_sources(frame, attribution, model)
    images = reconstruct_source_images(frame, attribution) if cfg.images else None
    timings["reconstruction_s"] = time.perf_counter() - t0
    timings["total_s"] = time.perf_counter() - t_total

    report = {
        "n_channels": signals.n_channels,
        "n_sources": n_sources,
        "sample_rate": signals.sample_rate,
        "frame_length": frame_length,
        "mode": mode,
        "q": cfg.q if mode == "soft" else None,
        "energy_floor_relative": cfg.energy_floor,
        "n_active_points": int(len(projection.indices)),
        "mixing_columns": model.means.tolist(),
        "concentrations": model.ks.tolist(),
        "weights": model.weights.tolist(),
        "em_iterations": fit.n_iter,
        "em_converged": fit.converged,
        "starved_components": fit.starved,
        "log_likelihood": fit.log_likelihood,
        "seed": cfg.fit.seed,
        "timings": timings,
    }
    return SeparationResult(
        sources=sources,
        model=model,
        attribution=attribution,
        report=report,
        images=images,
    )
