"""Information-theoretic distances between topic distributions.

All divergences use log base 2 and are therefore measured in bits.  Terms
with zero mass in the first argument are skipped (the 0*log 0 := 0
convention) rather than epsilon-smoothed; smoothing would silently distort
small divergences, and the JSD mixture has full support wherever either
argument does, so it needs none.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, SupportError

SIMPLEX_TOL = 1e-9


def validate_distribution(p) -> np.ndarray:
    """Check that ``p`` is a discrete probability distribution over >= 2 bins."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise DomainError("a distribution is a 1-D vector of length >= 2")
    if np.any(p < 0):
        raise DomainError("distribution has negative entries")
    total = p.sum()
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise DomainError(f"distribution sums to {total!r}, not 1")
    return p


def _check_pair(p, q):
    p = validate_distribution(p)
    q = validate_distribution(q)
    if p.size != q.size:
        raise DomainError(f"dimension mismatch: {p.size} vs {q.size}")
    return p, q


def kld(p, q) -> float:
    """Kullback-Leibler divergence ``sum p_i log2(p_i / q_i)`` in bits.

    Raises :class:`SupportError` where ``p`` puts mass outside the support
    of ``q``; an infinite divergence is rejected, never returned, because
    downstream averages must not absorb Inf.
    """
    p, q = _check_pair(p, q)
    mask = p > 0
    if np.any(q[mask] == 0):
        raise SupportError("p has mass where q is zero; divergence is infinite")
    pm = p[mask]
    return float(np.sum(pm * np.log2(pm / q[mask])))


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in bits, bounded to [0, 1] and symmetric."""
    p, q = _check_pair(p, q)
    m = 0.5 * (p + q)
    # m > 0 wherever p > 0 or q > 0, so no support check is needed.
    total = 0.0
    pmask = p > 0
    qmask = q > 0
    pm = p[pmask]
    qm = q[qmask]
    total += 0.5 * np.sum(pm * np.log2(pm / m[pmask]))
    total += 0.5 * np.sum(qm * np.log2(qm / m[qmask]))
    # Guard against a tiny negative sum from cancellation near p == q.
    return max(float(total), 0.0)


def jsd_distance(p, q) -> float:
    """Square root of the JSD: a proper metric on the simplex."""
    return math.sqrt(jsd(p, q))
