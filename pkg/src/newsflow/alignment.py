"""Elastic series comparison and averaging: DTW, soft-DTW, barycenters.

The local cost everywhere is the squared pointwise difference; that choice
makes the barycenter update a plain mean and keeps soft-DTW differentiable.
Operations accept :class:`~newsflow.core.Series` or bare 1-D arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import _backend
from .core import Series
from .errors import DomainError


def _values(x) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.ascontiguousarray(x, dtype=np.float64)


@dataclass(frozen=True)
class WarpPath:
    """A monotone, continuous alignment between two series.

    ``steps`` is an (L, 2) int64 array of index pairs running from (0, 0)
    to (n-1, m-1), each step advancing one or both indices by exactly 1.
    """

    steps: np.ndarray

    def __post_init__(self):
        s = self.steps
        if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] == 0:
            raise DomainError("a warp path is a non-empty (L, 2) array")
        if s[0, 0] != 0 or s[0, 1] != 0:
            raise DomainError("warp path must start at (0, 0)")
        d = np.diff(s, axis=0)
        if d.size and not (np.all(d >= 0) and np.all(d <= 1) and np.all(d.max(axis=1) == 1)):
            raise DomainError("warp path steps must advance by 0 or 1, at least one axis by 1")

    def __len__(self):
        return self.steps.shape[0]

    def __iter__(self):
        return iter(map(tuple, self.steps))


@dataclass
class Barycenter:
    """Consensus series for a set of members plus convergence bookkeeping."""

    values: np.ndarray
    objective: float
    iterations: int
    converged: bool


def _check_pair(a, b, band):
    if a.size == 0 or b.size == 0:
        raise DomainError("DTW inputs must be non-empty")
    if band is not None:
        if band < abs(a.size - b.size):
            raise DomainError(
                f"band {band} infeasible for lengths {a.size}, {b.size}"
            )
    return -1 if band is None else int(band)


def dtw(a, b, band: int | None = None) -> tuple[float, WarpPath]:
    """Dynamic time warping cost and one optimal path.

    Cost is the minimal sum of squared pointwise differences over all
    monotone, continuous alignments; ``band`` restricts the alignment to a
    Sakoe-Chiba corridor of that width.
    """
    av, bv = _values(a), _values(b)
    bandv = _check_pair(av, bv, band)
    cost, steps = _backend.dtw_cost_path(av, bv, bandv)
    return float(cost), WarpPath(steps)


def dtw_cost(a, b, band: int | None = None) -> float:
    """DTW cost only (cheaper than :func:`dtw` when the path is not needed)."""
    av, bv = _values(a), _values(b)
    bandv = _check_pair(av, bv, band)
    return float(_backend.dtw_cost(av, bv, bandv))


def soft_dtw(a, b, gamma: float) -> float:
    """Soft-DTW: the DTW recursion with min replaced by a soft minimum.

    Converges to the DTW cost as ``gamma -> 0``.  The value may be negative
    (the self-cost of a series is), which callers must accept.
    """
    if gamma <= 0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    av, bv = _values(a), _values(b)
    if av.size == 0 or bv.size == 0:
        raise DomainError("soft-DTW inputs must be non-empty")
    return float(_backend.softdtw_cost(av, bv, gamma))


def resample(values: np.ndarray, length: int) -> np.ndarray:
    """Linear-interpolation resampling onto ``length`` evenly spaced points."""
    values = np.asarray(values, dtype=np.float64)
    if length == values.size:
        return values.copy()
    old = np.linspace(0.0, 1.0, values.size)
    new = np.linspace(0.0, 1.0, length)
    return np.interp(new, old, values)


def _member_values(members) -> list[np.ndarray]:
    vals = [_values(m) for m in members]
    if not vals:
        raise DomainError("need at least one member series")
    if any(v.size == 0 for v in vals):
        raise DomainError("member series must be non-empty")
    return vals


def _medoid(vals: list[np.ndarray]) -> int:
    if len(vals) == 1:
        return 0
    same_length = len({v.size for v in vals}) == 1
    if same_length:
        d = _backend.pairwise_dtw(np.vstack(vals))
        return int(np.argmin(d.sum(axis=1)))
    totals = [
        sum(_backend.dtw_cost(v, w, -1) for w in vals) for v in vals
    ]
    return int(np.argmin(totals))


def dba(members, length: int | None = None, max_iter: int = 30, tol: float = 1e-6) -> Barycenter:
    """DTW barycenter averaging (iterative Petitjean refinement).

    Starts from the medoid (summed-DTW-cost minimizer, ties to the lowest
    index), then alternates aligning every member to the barycenter and
    replacing each coordinate by the mean of the member values warped onto
    it.  The objective (summed DTW cost to members) never increases; the
    loop stops when an iteration improves it by less than ``tol``.
    """
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    vals = _member_values(members)
    center = vals[_medoid(vals)]
    if length is not None:
        center = resample(center, length)
    objective = sum(_backend.dtw_cost(v, center, -1) for v in vals)
    iterations = 0
    converged = False
    for _ in range(max_iter):
        sums = np.zeros(center.size)
        counts = np.zeros(center.size)
        for v in vals:
            _, steps = _backend.dtw_cost_path(center, v, -1)
            np.add.at(sums, steps[:, 0], v[steps[:, 1]])
            np.add.at(counts, steps[:, 0], 1.0)
        candidate = sums / counts
        iterations += 1
        cand_objective = sum(_backend.dtw_cost(v, candidate, -1) for v in vals)
        improvement = objective - cand_objective
        # A non-improving update is discarded, so fixed points stay fixed
        # and the objective is non-increasing by construction.
        if cand_objective < objective:
            center, objective = candidate, cand_objective
        if improvement < tol:
            converged = True
            break
    return Barycenter(center, float(objective), iterations, converged)


def soft_dtw_barycenter(
    members,
    length: int | None = None,
    gamma: float = 1.0,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> Barycenter:
    """Barycenter under the soft-DTW loss, by quasi-Newton descent.

    Initialized from the euclidean mean of the members (resampled to
    ``length``); minimizes the summed soft-DTW cost with L-BFGS using the
    exact analytic gradient.  Never returns anything worse than the
    initializer.
    """
    if gamma <= 0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    vals = _member_values(members)
    if length is None:
        lengths = {v.size for v in vals}
        length = vals[0].size if len(lengths) == 1 else int(round(np.mean([v.size for v in vals])))
    init = np.mean([resample(v, length) for v in vals], axis=0)

    def objective(x):
        total = 0.0
        grad = np.zeros_like(x)
        for v in vals:
            value, g = _backend.softdtw_grad(x, v, gamma)
            total += value
            grad += g
        return total, grad

    f0, _ = objective(init)
    res = minimize(
        objective,
        init,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": tol},
    )
    if res.fun <= f0:
        values, final = res.x, float(res.fun)
    else:
        values, final = init, float(f0)
    return Barycenter(values, final, int(res.nit), bool(res.success))
