"""Shared test utilities: independent oracles and synthetic generators.

Everything here is deliberately separate from the library code paths it
checks: the trapezoid integrator, the rejection vMF sampler and the
half-sphere quadratures are written from their textbook definitions.
"""

import numpy as np
from scipy.integrate import dblquad, quad


def trapezoid_sine_integral(p, k, panels=10**6):
    """Dense-trapezoid oracle for (1/pi) * int_0^pi exp(-k sin t) sin^p t dt."""
    t = np.linspace(0.0, np.pi, panels + 1)
    f = np.exp(-k * np.sin(t)) * np.sin(t) ** p
    return np.trapezoid(f, t) / np.pi


def half_circle_integral(density, tol=1e-10):
    """Integrate a density of the angle over [0, pi)."""
    val, _ = quad(density, 0.0, np.pi, epsabs=tol, epsrel=tol, limit=200)
    return val


def half_sphere_integral(density_xyz, tol=1e-9):
    """Integrate a density over the half 2-sphere by angle-box quadrature.

    density_xyz maps a 3-vector to a density value; the parameterization is
    x = [cos a1 cos a2, sin a1 cos a2, sin a2] with area element |cos a2|,
    split at a2 = pi/2 where the cosine changes sign.
    """

    def integrand(a2, a1):
        x = np.array(
            [np.cos(a1) * np.cos(a2), np.sin(a1) * np.cos(a2), np.sin(a2)]
        )
        return density_xyz(x) * abs(np.cos(a2))

    lower, _ = dblquad(integrand, 0.0, np.pi, 0.0, np.pi / 2, epsabs=tol)
    upper, _ = dblquad(integrand, 0.0, np.pi, np.pi / 2, np.pi, epsabs=tol)
    return lower + upper


def random_unit_rows(rng, n, p):
    x = rng.standard_normal((n, p))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def sample_vmf_rejection(mu, kappa, n, rng):
    """Wood-style accept/reject von Mises-Fisher sampler (full sphere)."""
    mu = np.asarray(mu, dtype=float)
    p = len(mu)
    dim = p - 1
    b = dim / (np.sqrt(4.0 * kappa**2 + dim**2) + 2.0 * kappa)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + dim * np.log(1.0 - x0**2)
    out = np.empty((n, p))
    for i in range(n):
        while True:
            z = rng.beta(dim / 2.0, dim / 2.0)
            w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
            u = rng.random()
            if kappa * w + dim * np.log(1.0 - x0 * w) - c >= np.log(u):
                break
        v = rng.standard_normal(p)
        v -= (v @ mu) * mu
        v /= np.linalg.norm(v)
        out[i] = w * mu + np.sqrt(max(0.0, 1.0 - w * w)) * v
    return out


def rotation_matrix(rng, p):
    """Haar-ish random rotation via QR with positive diagonal."""
    a = rng.standard_normal((p, p))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def disjoint_sparse_sources(n_sources, n_samples, frame_length, seed,
                            fill=0.9, background_scale=1e-4):
    """Time signals that are sparse in the MDCT domain with disjoint
    dominant supports: the coefficient grid is partitioned among sources,
    each source draws unit-scale Laplacian coefficients on its own share
    plus a faint Laplacian background everywhere."""
    from dirlap.separation import MdctFrame, mdct_inverse

    rng = np.random.default_rng(seed)
    half = frame_length // 2
    n_frames = int(np.ceil(n_samples / half)) + 1
    owner = rng.integers(0, n_sources, (half, n_frames))
    sources = []
    for i in range(n_sources):
        plane = rng.laplace(0.0, background_scale, (half, n_frames))
        mask = (owner == i) & (rng.random((half, n_frames)) < fill)
        plane[mask] = rng.laplace(0.0, 1.0, int(mask.sum()))
        frame = MdctFrame(
            coefficients=plane[None],
            frame_length=frame_length,
            sample_rate=16000.0,
            n_samples=n_samples,
        )
        sources.append(mdct_inverse(frame)[0])
    return np.array(sources)


def mixing_columns_2d(angles_deg):
    a = np.deg2rad(np.asarray(angles_deg, dtype=float))
    return np.stack([np.cos(a), np.sin(a)])


def mixing_columns_3d(theta1_deg, theta2_deg):
    t1 = np.deg2rad(np.asarray(theta1_deg, dtype=float))
    t2 = np.deg2rad(np.asarray(theta2_deg, dtype=float))
    return np.stack(
        [np.cos(t2) * np.cos(t1), np.cos(t2) * np.sin(t1), np.sin(t2)]
    )


def mixing_columns_4d(theta1_deg, theta2_deg, theta3_deg):
    t1 = np.deg2rad(np.asarray(theta1_deg, dtype=float))
    t2 = np.deg2rad(np.asarray(theta2_deg, dtype=float))
    t3 = np.deg2rad(np.asarray(theta3_deg, dtype=float))
    return np.stack(
        [
            np.cos(t3) * np.cos(t2) * np.cos(t1),
            np.cos(t3) * np.cos(t2) * np.sin(t1),
            np.cos(t3) * np.sin(t2),
            np.sin(t3),
        ]
    )


def greedy_axis_match(estimated, truth):
    """Match rows of two axis sets by descending |dot|; returns per-truth dots."""
    dots = np.abs(estimated @ truth.T)
    work = dots.copy()
    matched = {}
    for _ in range(min(work.shape)):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        matched[int(j)] = float(dots[i, j])
        work[i, :] = -1.0
        work[:, j] = -1.0
    return np.array([matched[j] for j in range(truth.shape[0])])
