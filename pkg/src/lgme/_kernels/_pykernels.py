"""Pure-Python (numpy/scipy) implementations of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.special import gammaln

BACKEND = "python"


def fmsv_support(lam, n_max):
    """Occupations and amplitudes of the truncated four-mode squeezed vacuum.

    Entries are emitted in (n, r1, r2) loop order with occupation tuple
    ``(n - r1, n - r2, r1, r2)``.

    Parameters
    ----------
    lam : float
        ``tanh r`` in [0, 1).
    n_max : int
        Largest shell index kept.

    Returns
    -------
    occ : ndarray of int64, shape (S, 4)
    amp : ndarray of float64, shape (S,)
    """
    n_max = int(n_max)
    if lam == 0.0:
        n_max = 0
    counts = (np.arange(n_max + 1) + 1) ** 2
    n = np.repeat(np.arange(n_max + 1), counts)
    # r1, r2 enumerate a (n+1) x (n+1) block per shell
    offsets = np.arange(n.size) - np.repeat(np.cumsum(counts) - counts, counts)
    r1 = offsets // (n + 1)
    r2 = offsets % (n + 1)
    occ = np.stack([n - r1, n - r2, r1, r2], axis=1).astype(np.int64)

    log_binom_1 = gammaln(n + 1) - gammaln(r1 + 1) - gammaln(n - r1 + 1)
    log_binom_2 = gammaln(n + 1) - gammaln(r2 + 1) - gammaln(n - r2 + 1)
    log_amp = 0.5 * (log_binom_1 + log_binom_2)
    if n_max > 0:
        log_amp = log_amp + n * (np.log(lam) - np.log(2.0))
    amp = np.sqrt(1.0 - lam * lam) * np.exp(log_amp)
    return occ, amp


def top_singular_sq(indptr, indices, data, n_cols, tol, max_iter):
    """Largest squared singular value of a CSR matrix by power iteration.

    Iterates ``v <- M^T M v`` from the all-ones start vector and stops when
    the Rayleigh quotient changes by less than ``tol`` relative.

    Returns
    -------
    value : float
    iterations : int
    converged : bool
    """
    n_rows = len(indptr) - 1
    mat = csr_matrix((data, indices, indptr), shape=(n_rows, int(n_cols)))
    vec = np.ones(int(n_cols)) / np.sqrt(n_cols)
    prev = 0.0
    for it in range(1, int(max_iter) + 1):
        w = mat.T @ (mat @ vec)
        est = float(vec @ w)
        norm = float(np.sqrt(w @ w))
        if norm == 0.0:
            return 0.0, it, True
        vec = w / norm
        if abs(est - prev) <= tol * abs(est):
            return est, it, True
        prev = est
    return prev, int(max_iter), False
