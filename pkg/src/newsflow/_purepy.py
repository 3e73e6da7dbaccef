"""Numpy fallback for the hot kernels.

Mirrors the compiled extension (``_kernels.pyx``) function for function; the
active implementation is picked in ``_backend``.  The DTW recurrences are
evaluated along anti-diagonals so the inner loops vectorize; the arithmetic
per cell (one addition, exact minima) is identical to the compiled version,
so DTW costs agree bitwise between backends.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "purepy"

_INF = np.inf


def _cost_matrix(a, b, band):
    c = (a[:, None] - b[None, :]) ** 2
    if band >= 0:
        i = np.arange(a.size)[:, None]
        j = np.arange(b.size)[None, :]
        c = np.where(np.abs(i - j) <= band, c, _INF)
    return c


def _dp(a, b, band):
    n, m = a.size, b.size
    c = _cost_matrix(a, b, band)
    dp = np.full((n + 1, m + 1), _INF)
    dp[0, 0] = 0.0
    for d in range(2, n + m + 1):
        i = np.arange(max(1, d - m), min(n, d - 1) + 1)
        if i.size == 0:
            continue
        j = d - i
        best = np.minimum(dp[i - 1, j - 1], np.minimum(dp[i - 1, j], dp[i, j - 1]))
        dp[i, j] = c[i - 1, j - 1] + best
    return dp


def dtw_cost(a, b, band=-1):
    """Minimal sum of squared differences over all admissible warp paths."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    return float(_dp(a, b, band)[a.size, b.size])


def dtw_cost_path(a, b, band=-1):
    """DTW cost plus one optimal warp path as an (L, 2) int64 array.

    Ties during backtracking prefer the diagonal step, then the vertical
    one; the compiled backend applies the same rule.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    dp = _dp(a, b, band)
    i, j = a.size, b.size
    cost = float(dp[i, j])
    steps = [(i - 1, j - 1)]
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
        steps.append((i - 1, j - 1))
    return cost, np.array(steps[::-1], dtype=np.int64)


def pairwise_dtw(x, band=-1, chunk=512):
    """Full symmetric matrix of DTW costs between the rows of ``x``.

    The DP runs over all pairs of one chunk at once, anti-diagonal by
    anti-diagonal; per-pair arithmetic matches :func:`dtw_cost` exactly.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    nseries, length = x.shape
    ii, jj = np.triu_indices(nseries, k=1)
    out = np.zeros((nseries, nseries))
    for start in range(0, ii.size, chunk):
        pi = ii[start : start + chunk]
        pj = jj[start : start + chunk]
        a = x[pi]
        b = x[pj]
        c = (a[:, :, None] - b[:, None, :]) ** 2
        if band >= 0:
            u = np.arange(length)[:, None]
            v = np.arange(length)[None, :]
            c = np.where(np.abs(u - v) <= band, c, _INF)
        dp = np.full((pi.size, length + 1, length + 1), _INF)
        dp[:, 0, 0] = 0.0
        for d in range(2, 2 * length + 1):
            i = np.arange(max(1, d - length), min(length, d - 1) + 1)
            if i.size == 0:
                continue
            j = d - i
            best = np.minimum(
                dp[:, i - 1, j - 1], np.minimum(dp[:, i - 1, j], dp[:, i, j - 1])
            )
            dp[:, i, j] = c[:, i - 1, j - 1] + best
        costs = dp[:, length, length]
        out[pi, pj] = costs
        out[pj, pi] = costs
    return out


def softdtw_cost(a, b, gamma):
    """Soft-DTW value: the soft-minimum relaxation of the DTW recursion."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    r = _soft_forward(a, b, gamma)
    return float(r[a.size, b.size])


def _soft_forward(a, b, gamma):
    n, m = a.size, b.size
    c = (a[:, None] - b[None, :]) ** 2
    r = np.full((n + 1, m + 1), _INF)
    r[0, 0] = 0.0
    for d in range(2, n + m + 1):
        i = np.arange(max(1, d - m), min(n, d - 1) + 1)
        if i.size == 0:
            continue
        j = d - i
        x = r[i - 1, j - 1]
        y = r[i - 1, j]
        z = r[i, j - 1]
        mn = np.minimum(x, np.minimum(y, z))
        s = (
            np.exp((mn - x) / gamma)
            + np.exp((mn - y) / gamma)
            + np.exp((mn - z) / gamma)
        )
        r[i, j] = c[i - 1, j - 1] + mn - gamma * np.log(s)
    return r


def softdtw_grad(a, b, gamma):
    """Soft-DTW value and its gradient with respect to ``a``.

    Backward pass over the alignment-weight matrix E; the gradient of the
    squared-difference local cost is chained in closed form.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n, m = a.size, b.size
    c = np.zeros((n + 2, m + 2))
    c[1 : n + 1, 1 : m + 1] = (a[:, None] - b[None, :]) ** 2
    r = np.full((n + 2, m + 2), _INF)
    r[: n + 1, : m + 1] = _soft_forward(a, b, gamma)
    value = float(r[n, m])
    r[n + 1, :] = -_INF
    r[:, m + 1] = -_INF
    r[n + 1, m + 1] = r[n, m]
    e = np.zeros((n + 2, m + 2))
    e[n + 1, m + 1] = 1.0
    for d in range(n + m, 1, -1):
        i = np.arange(max(1, d - m), min(n, d - 1) + 1)
        if i.size == 0:
            continue
        j = d - i
        wa = np.exp((r[i + 1, j] - r[i, j] - c[i + 1, j]) / gamma)
        wb = np.exp((r[i, j + 1] - r[i, j] - c[i, j + 1]) / gamma)
        wc = np.exp((r[i + 1, j + 1] - r[i, j] - c[i + 1, j + 1]) / gamma)
        e[i, j] = wa * e[i + 1, j] + wb * e[i, j + 1] + wc * e[i + 1, j + 1]
    ein = e[1 : n + 1, 1 : m + 1]
    grad = 2.0 * (a * ein.sum(axis=1) - ein @ b)
    return value, grad


def paired_jsd_mean(a, b):
    """Mean Jensen-Shannon divergence (bits) over rank-paired simplex rows."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"paired blocks differ in shape: {a.shape} vs {b.shape}")
    m = 0.5 * (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0, a * np.log2(np.where(a > 0, a / m, 1.0)), 0.0)
        tb = np.where(b > 0, b * np.log2(np.where(b > 0, b / m, 1.0)), 0.0)
    vals = 0.5 * ta.sum(axis=1) + 0.5 * tb.sum(axis=1)
    return float(np.maximum(vals, 0.0).mean())
