# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: DTW lattice, soft-DTW recursion, paired JSD.

Semantics match ``_purepy`` exactly; see that module for the reference
formulation.  Only plain IEEE arithmetic is used (no fast-math), so DTW
costs agree bitwise with the fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, log, log2

cnp.import_array()

BACKEND_NAME = "cython"


cdef inline double _sq(double x) nogil:
    return x * x


cdef inline double _min3(double a, double b, double c) nogil:
    cdef double m = a
    if b < m:
        m = b
    if c < m:
        m = c
    return m


def dtw_cost(a, b, int band=-1):
    """Minimal sum of squared differences over all admissible warp paths."""
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    return _dtw_cost_rows(av, bv, band)


cdef double _dtw_cost_rows(const double[::1] a, const double[::1] b, int band):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prev_arr = np.empty(m + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] curr_arr = np.empty(m + 1)
    cdef double[::1] prev = prev_arr
    cdef double[::1] curr = curr_arr
    cdef Py_ssize_t i, j
    cdef double c
    prev[0] = 0.0
    for j in range(1, m + 1):
        prev[j] = INFINITY
    for i in range(1, n + 1):
        curr[0] = INFINITY
        for j in range(1, m + 1):
            if band >= 0 and (i - j > band or j - i > band):
                curr[j] = INFINITY
                continue
            c = _sq(a[i - 1] - b[j - 1])
            curr[j] = c + _min3(prev[j - 1], prev[j], curr[j - 1])
        prev, curr = curr, prev
    return prev[m]


def dtw_cost_path(a, b, int band=-1):
    """DTW cost plus one optimal warp path as an (L, 2) int64 array."""
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0]
    cdef Py_ssize_t m = bv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dp_arr = np.empty((n + 1, m + 1))
    cdef double[:, ::1] dp = dp_arr
    cdef Py_ssize_t i, j
    cdef double c, diag, up, left
    dp[0, 0] = 0.0
    for j in range(1, m + 1):
        dp[0, j] = INFINITY
    for i in range(1, n + 1):
        dp[i, 0] = INFINITY
        for j in range(1, m + 1):
            if band >= 0 and (i - j > band or j - i > band):
                dp[i, j] = INFINITY
                continue
            c = _sq(av[i - 1] - bv[j - 1])
            dp[i, j] = c + _min3(dp[i - 1, j - 1], dp[i - 1, j], dp[i, j - 1])
    cdef double cost = dp[n, m]
    # Backtrack; ties prefer diagonal, then vertical.
    cdef cnp.ndarray[cnp.int64_t, ndim=2] steps = np.empty((n + m, 2), dtype=np.int64)
    cdef Py_ssize_t pos = n + m - 1
    i = n
    j = m
    steps[pos, 0] = i - 1
    steps[pos, 1] = j - 1
    while i > 1 or j > 1:
        diag = dp[i - 1, j - 1]
        up = dp[i - 1, j]
        left = dp[i, j - 1]
        if diag <= up and diag <= left:
            i -= 1
            j -= 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
        pos -= 1
        steps[pos, 0] = i - 1
        steps[pos, 1] = j - 1
    return cost, np.ascontiguousarray(steps[pos:])


def pairwise_dtw(x, int band=-1):
    """Full symmetric matrix of DTW costs between the rows of ``x``."""
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t nseries = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.zeros((nseries, nseries))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double c
    for i in range(nseries):
        for j in range(i + 1, nseries):
            c = _dtw_cost_rows(xv[i], xv[j], band)
            out[i, j] = c
            out[j, i] = c
    return out_arr


cdef inline double _softmin3(double a, double b, double c, double gamma) nogil:
    cdef double m = _min3(a, b, c)
    cdef double s = exp((m - a) / gamma) + exp((m - b) / gamma) + exp((m - c) / gamma)
    return m - gamma * log(s)


def softdtw_cost(a, b, double gamma):
    """Soft-DTW value: the soft-minimum relaxation of the DTW recursion."""
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r = _soft_forward(av, bv, gamma)
    return float(r[av.shape[0], bv.shape[0]])


cdef cnp.ndarray[cnp.float64_t, ndim=2] _soft_forward(
    const double[::1] a, const double[::1] b, double gamma
):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r_arr = np.full((n + 1, m + 1), INFINITY)
    cdef double[:, ::1] r = r_arr
    cdef Py_ssize_t i, j
    cdef double c
    r[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            c = _sq(a[i - 1] - b[j - 1])
            r[i, j] = c + _softmin3(r[i - 1, j - 1], r[i - 1, j], r[i, j - 1], gamma)
    return r_arr


def softdtw_grad(a, b, double gamma):
    """Soft-DTW value and its gradient with respect to ``a``."""
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0]
    cdef Py_ssize_t m = bv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r_arr = np.full((n + 2, m + 2), INFINITY)
    cdef double[:, ::1] r = r_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=2] inner = _soft_forward(av, bv, gamma)
    r_arr[: n + 1, : m + 1] = inner
    cdef double value = r[n, m]
    cdef Py_ssize_t i, j
    for j in range(m + 2):
        r[n + 1, j] = -INFINITY
    for i in range(n + 2):
        r[i, m + 1] = -INFINITY
    r[n + 1, m + 1] = value
    cdef cnp.ndarray[cnp.float64_t, ndim=2] e_arr = np.zeros((n + 2, m + 2))
    cdef double[:, ::1] e = e_arr
    e[n + 1, m + 1] = 1.0
    cdef double wa, wb, wc, ca, cb, cc
    for i in range(n, 0, -1):
        for j in range(m, 0, -1):
            ca = _sq(av[i] - bv[j - 1]) if i < n else 0.0
            cb = _sq(av[i - 1] - bv[j]) if j < m else 0.0
            cc = _sq(av[i] - bv[j]) if (i < n and j < m) else 0.0
            wa = exp((r[i + 1, j] - r[i, j] - ca) / gamma)
            wb = exp((r[i, j + 1] - r[i, j] - cb) / gamma)
            wc = exp((r[i + 1, j + 1] - r[i, j] - cc) / gamma)
            e[i, j] = wa * e[i + 1, j] + wb * e[i, j + 1] + wc * e[i + 1, j + 1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_arr = np.zeros(n)
    cdef double[::1] grad = grad_arr
    cdef double acc
    for i in range(1, n + 1):
        acc = 0.0
        for j in range(1, m + 1):
            acc += e[i, j] * 2.0 * (av[i - 1] - bv[j - 1])
        grad[i - 1] = acc
    return value, grad_arr


def paired_jsd_mean(a, b):
    """Mean Jensen-Shannon divergence (bits) over rank-paired simplex rows."""
    cdef const double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    if av.shape[0] != bv.shape[0] or av.shape[1] != bv.shape[1]:
        raise ValueError(
            f"paired blocks differ in shape: "
            f"{(av.shape[0], av.shape[1])} vs {(bv.shape[0], bv.shape[1])}"
        )
    cdef Py_ssize_t w = av.shape[0]
    cdef Py_ssize_t k = av.shape[1]
    cdef Py_ssize_t r, t
    cdef double p, q, mix, acc_p, acc_q, val, total
    total = 0.0
    for r in range(w):
        acc_p = 0.0
        acc_q = 0.0
        for t in range(k):
            p = av[r, t]
            q = bv[r, t]
            mix = 0.5 * (p + q)
            if p > 0.0:
                acc_p += p * log2(p / mix)
            if q > 0.0:
                acc_q += q * log2(q / mix)
        val = 0.5 * acc_p + 0.5 * acc_q
        if val < 0.0:
            val = 0.0
        total += val
    return total / w
