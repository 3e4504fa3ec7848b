# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fitting kernels.

Fused single-pass versions of the NumPy kernels in _kernels_py: one sweep
over the data computes dot products, axial sines, posteriors and the
accumulated statistics without materializing (N, K) temporaries.  Contract
documented in _kernels_py.
"""

import numpy as np

from libc.math cimport exp, log, sqrt

DEF GRAD_SIN_FLOOR = 1e-6


def responsibilities(double[:, ::1] x, double[:, ::1] means,
                     double[::1] ks, double[::1] log_wc):
    cdef Py_ssize_t n_pts = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef Py_ssize_t n_comp = means.shape[0]
    resp_arr = np.empty((n_pts, n_comp), dtype=np.float64)
    scratch_arr = np.empty(n_comp, dtype=np.float64)
    cdef double[:, ::1] resp = resp_arr
    cdef double[::1] logd = scratch_arr
    cdef double simplified = 0.0
    cdef double marginal = 0.0
    cdef double t, s, peak, tot, v
    cdef Py_ssize_t n, i, j
    for n in range(n_pts):
        peak = -1e308
        for i in range(n_comp):
            t = 0.0
            for j in range(p):
                t += means[i, j] * x[n, j]
            if t > 1.0:
                t = 1.0
            elif t < -1.0:
                t = -1.0
            s = sqrt(1.0 - t * t)
            v = log_wc[i] - ks[i] * s
            logd[i] = v
            if v > peak:
                peak = v
        tot = 0.0
        for i in range(n_comp):
            tot += exp(logd[i] - peak)
        if not (tot > 0.0):
            for i in range(n_comp):
                resp[n, i] = 1.0 / n_comp
            continue
        marginal += peak + log(tot)
        for i in range(n_comp):
            v = exp(logd[i] - peak) / tot
            resp[n, i] = v
            simplified += v * logd[i]
    return resp_arr, simplified, marginal


def weighted_moments(double[:, ::1] x, double[:, ::1] means,
                     double[:, ::1] resp):
    cdef Py_ssize_t n_pts = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef Py_ssize_t n_comp = means.shape[0]
    r_sum_arr = np.zeros(n_comp, dtype=np.float64)
    rs_sum_arr = np.zeros(n_comp, dtype=np.float64)
    grad_arr = np.zeros((n_comp, p), dtype=np.float64)
    cdef double[::1] r_sum = r_sum_arr
    cdef double[::1] rs_sum = rs_sum_arr
    cdef double[:, ::1] grad = grad_arr
    cdef double t, s, r, coef
    cdef Py_ssize_t n, i, j
    for n in range(n_pts):
        for i in range(n_comp):
            t = 0.0
            for j in range(p):
                t += means[i, j] * x[n, j]
            if t > 1.0:
                t = 1.0
            elif t < -1.0:
                t = -1.0
            s = sqrt(1.0 - t * t)
            r = resp[n, i]
            r_sum[i] += r
            rs_sum[i] += r * s
            if s < GRAD_SIN_FLOOR:
                s = GRAD_SIN_FLOOR
            coef = r * t / s
            for j in range(p):
                grad[i, j] += coef * x[n, j]
    return r_sum_arr, rs_sum_arr, grad_arr


def axial_sin(double[:, ::1] x, double[:, ::1] means):
    cdef Py_ssize_t n_pts = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef Py_ssize_t n_comp = means.shape[0]
    out_arr = np.empty((n_pts, n_comp), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double t
    cdef Py_ssize_t n, i, j
    for n in range(n_pts):
        for i in range(n_comp):
            t = 0.0
            for j in range(p):
                t += means[i, j] * x[n, j]
            if t > 1.0:
                t = 1.0
            elif t < -1.0:
                t = -1.0
            out[n, i] = sqrt(1.0 - t * t)
    return out_arr
