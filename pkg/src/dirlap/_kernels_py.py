"""Pure NumPy implementation of the hot fitting kernels.

Same contract as the compiled backend in _kernels_cy.pyx; selected as the
fallback by dirlap.backends when the extension is unavailable.

Conventions shared by both backends:

* x is (N, p) C-contiguous float64, rows unit norm;
* means is (K, p), ks and log_wc are (K,);
* t = clip(m_i . x_n, -1, 1), s = sqrt(1 - t^2);
* divisions by s use s_safe = max(s, 1e-6) to bound the gradient near
  the mean axis.
"""

import numpy as np

GRAD_SIN_FLOOR = 1e-6


def responsibilities(x, means, ks, log_wc):
    """Posterior component weights plus both likelihood readings.

    Returns (resp, simplified_ll, marginal_ll) where resp is (N, K),
    simplified_ll = sum_n sum_i resp[n,i] * (log_wc[i] - ks[i]*s[n,i])
    and marginal_ll = sum_n log sum_i exp(log_wc[i] - ks[i]*s[n,i]).
    Rows whose densities all vanish are set uniform.
    """
    t = np.clip(x @ means.T, -1.0, 1.0)
    s = np.sqrt(1.0 - t * t)
    logd = log_wc[None, :] - ks[None, :] * s
    peak = logd.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        w = np.exp(logd - peak)
    tot = w.sum(axis=1, keepdims=True)
    bad = ~np.isfinite(tot[:, 0]) | (tot[:, 0] <= 0.0)
    if np.any(bad):
        # vanished rows: uniform posteriors, no likelihood contribution
        w[bad] = 1.0
        tot[bad] = w.shape[1]
        logd[bad] = 0.0
    resp = w / tot
    row_ll = peak[:, 0] + np.log(tot[:, 0])
    row_ll[bad] = 0.0
    marginal = float(row_ll.sum())
    simplified = float((resp * logd).sum())
    return resp, simplified, marginal


def weighted_moments(x, means, resp):
    """Responsibility-weighted sufficient statistics for the update step.

    Returns (r_sum, rs_sum, grad):
      r_sum[i]  = sum_n resp[n,i]
      rs_sum[i] = sum_n resp[n,i] * s[n,i]
      grad[i]   = sum_n resp[n,i] * (t[n,i]/s_safe[n,i]) * x[n]
    """
    t = np.clip(x @ means.T, -1.0, 1.0)
    s = np.sqrt(1.0 - t * t)
    r_sum = resp.sum(axis=0)
    rs_sum = (resp * s).sum(axis=0)
    grad = (resp * t / np.maximum(s, GRAD_SIN_FLOOR)).T @ x
    return r_sum, rs_sum, np.ascontiguousarray(grad)


def axial_sin(x, means):
    """s[n,i] = sqrt(1 - (m_i . x_n)^2), the sine of the axial angle."""
    t = np.clip(x @ means.T, -1.0, 1.0)
    return np.sqrt(1.0 - t * t)
