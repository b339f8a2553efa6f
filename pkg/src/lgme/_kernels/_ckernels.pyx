# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, lgamma, log, sqrt

cnp.import_array()

BACKEND = "cython"


def fmsv_support(double lam, long n_max):
    cdef long n, r1, r2, idx = 0, size
    cdef double log_half_lam = 0.0, prefactor, lb1, lg_n
    if lam == 0.0:
        n_max = 0
    else:
        log_half_lam = log(lam) - log(2.0)
    size = (n_max + 1) * (n_max + 2) * (2 * n_max + 3) // 6
    occ_arr = np.empty((size, 4), dtype=np.int64)
    amp_arr = np.empty(size, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] occ = occ_arr
    cdef double[::1] amp = amp_arr
    prefactor = sqrt(1.0 - lam * lam)
    for n in range(n_max + 1):
        lg_n = lgamma(n + 1.0)
        for r1 in range(n + 1):
            lb1 = lg_n - lgamma(r1 + 1.0) - lgamma(n - r1 + 1.0)
            for r2 in range(n + 1):
                occ[idx, 0] = n - r1
                occ[idx, 1] = n - r2
                occ[idx, 2] = r1
                occ[idx, 3] = r2
                amp[idx] = prefactor * exp(
                    n * log_half_lam
                    + 0.5 * (lb1 + lg_n - lgamma(r2 + 1.0) - lgamma(n - r2 + 1.0))
                )
                idx += 1
    return occ_arr, amp_arr


def top_singular_sq(indptr, indices, data, long n_cols, double tol, long max_iter):
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] col = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] val = np.ascontiguousarray(data, dtype=np.float64)
    cdef long n_rows = ptr.shape[0] - 1
    cdef double[::1] vec = np.full(n_cols, 1.0 / sqrt(n_cols))
    cdef double[::1] w = np.zeros(n_cols)
    cdef double[::1] y = np.zeros(n_rows)
    cdef long it, i, j, k
    cdef double acc, est, norm, prev = 0.0
    for it in range(1, max_iter + 1):
        for i in range(n_rows):
            acc = 0.0
            for k in range(ptr[i], ptr[i + 1]):
                acc += val[k] * vec[col[k]]
            y[i] = acc
        for j in range(n_cols):
            w[j] = 0.0
        for i in range(n_rows):
            for k in range(ptr[i], ptr[i + 1]):
                w[col[k]] += val[k] * y[i]
        est = 0.0
        norm = 0.0
        for j in range(n_cols):
            est += vec[j] * w[j]
            norm += w[j] * w[j]
        norm = sqrt(norm)
        if norm == 0.0:
            return 0.0, it, True
        for j in range(n_cols):
            vec[j] = w[j] / norm
        if fabs(est - prev) <= tol * fabs(est):
            return est, it, True
        prev = est
    return prev, max_iter, False
