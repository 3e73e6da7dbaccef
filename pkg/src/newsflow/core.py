"""Shared domain types and elementary series utilities.

The whole pipeline moves three kinds of data around: date-indexed topic
distribution matrices (one per source), plain numeric series (curves, flows,
barycenters) and event records.  All of them are immutable after
construction and validated eagerly, so downstream code never re-checks.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyWindowError

ROW_SUM_TOL = 1e-9


def as_date(value) -> dt.date:
    """Coerce an ISO-8601 string, date or datetime64 to a ``datetime.date``."""
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    if isinstance(value, np.datetime64):
        return value.astype("datetime64[D]").astype(dt.date)
    if isinstance(value, str):
        try:
            return dt.date.fromisoformat(value.strip())
        except ValueError as exc:
            raise DomainError(f"not an ISO-8601 date: {value!r}") from exc
    raise DomainError(f"cannot interpret {value!r} as a date")


@dataclass(frozen=True)
class EventRecord:
    """A named, dated event."""

    name: str
    date: dt.date

    def __post_init__(self):
        object.__setattr__(self, "date", as_date(self.date))


@dataclass(frozen=True)
class Series:
    """A finite numeric sequence over a strictly increasing index.

    ``index`` may hold integer offsets (day jumps) or ``datetime64[D]``
    values; ``values`` is always float64.
    """

    values: np.ndarray
    index: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DomainError("series values must be one-dimensional")
        if self.index is None:
            index = np.arange(values.size, dtype=np.int64)
        else:
            index = np.asarray(self.index)
        if index.shape != values.shape:
            raise DomainError(
                f"index length {index.size} != values length {values.size}"
            )
        if values.size and not np.all(np.isfinite(values)):
            raise DomainError("series values must be finite")
        if index.size > 1 and not np.all(index[1:] > index[:-1]):
            raise DomainError("series index must be strictly increasing")
        values.setflags(write=False)
        index.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "index", index)

    def __len__(self):
        return self.values.size

    def with_values(self, values) -> "Series":
        return Series(np.asarray(values, dtype=np.float64), self.index)


class ThetaMatrix:
    """Per-source matrix of daily topic distributions.

    One row per published day, each row a point on the probability simplex.
    Dates are strictly increasing; missing publication days are simply
    absent.

    Parameters
    ----------
    source_id : str
        Identifier of the source (newspaper code, synthetic id, ...).
    dates : sequence
        ISO strings, ``datetime.date`` or ``datetime64`` values, strictly
        increasing, one per row.
    rows : (N, K) array
        Non-negative, each row summing to 1 within ``1e-9``.
    """

    __slots__ = ("source_id", "dates", "rows", "n_topics")

    def __init__(self, source_id: str, dates, rows):
        rows = np.ascontiguousarray(rows, dtype=np.float64)
        if rows.ndim != 2:
            raise DomainError("rows must be a 2-D matrix")
        n, k = rows.shape
        if k < 2:
            raise DomainError(f"need at least 2 topics, got {k}")
        if n == 0:
            raise DomainError("matrix has no rows")
        if np.any(rows < 0):
            raise DomainError("topic probabilities must be non-negative")
        sums = rows.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
        if bad.size:
            raise DomainError(
                f"row {bad[0]} sums to {sums[bad[0]]:.12f}, not 1"
            )
        dates = np.asarray(
            [np.datetime64(as_date(d), "D") for d in dates], dtype="datetime64[D]"
        )
        if dates.size != n:
            raise DomainError(f"{dates.size} dates for {n} rows")
        if dates.size > 1 and not np.all(dates[1:] > dates[:-1]):
            raise DomainError("dates must be strictly increasing")
        rows.setflags(write=False)
        dates.setflags(write=False)
        self.source_id = source_id
        self.dates = dates
        self.rows = rows
        self.n_topics = k

    def __len__(self):
        return self.rows.shape[0]

    @property
    def first_date(self) -> np.datetime64:
        return self.dates[0]

    @property
    def last_date(self) -> np.datetime64:
        return self.dates[-1]

    def row_range(self, start, stop) -> np.ndarray:
        """Rows with ``start <= date <= stop`` (possibly empty), in date order."""
        start = np.datetime64(as_date(start), "D")
        stop = np.datetime64(as_date(stop), "D")
        lo = np.searchsorted(self.dates, start, side="left")
        hi = np.searchsorted(self.dates, stop, side="right")
        return self.rows[lo:hi]


def z_normalize(s: Series) -> Series:
    """Center to mean 0 and scale to population standard deviation 1.

    A series whose standard deviation is below ``1e-12`` comes back as all
    zeros: flat stretches of a corpus produce flat flows and the pipeline
    has to accept them rather than die.
    """
    if len(s) == 0:
        raise DomainError("cannot z-normalize an empty series")
    centered = s.values - s.values.mean()
    sigma = np.sqrt(np.mean(centered**2))
    if sigma < 1e-12:
        return s.with_values(np.zeros_like(s.values))
    out = centered / sigma
    # second centering pass kills the cancellation residue of huge offsets
    out -= out.mean()
    return s.with_values(out)


def rolling_mean(s: Series, k: int) -> Series:
    """Centered moving average of window length ``k``.

    Edges use the truncated window, so output length equals input length.
    For even ``k`` the window extends one step further to the right.
    """
    n = len(s)
    if k < 1 or k > n:
        raise DomainError(f"rolling-mean window {k} invalid for length {n}")
    if k == 1:
        return s.with_values(s.values.copy())
    left = (k - 1) // 2
    right = k // 2
    csum = np.concatenate(([0.0], np.cumsum(s.values)))
    lo = np.maximum(np.arange(n) - left, 0)
    hi = np.minimum(np.arange(n) + right, n - 1)
    out = (csum[hi + 1] - csum[lo]) / (hi - lo + 1)
    return s.with_values(out)


def slice_window(m: ThetaMatrix, center, half_width: int) -> np.ndarray:
    """All rows dated within ``half_width`` days of ``center``.

    Missing publication days are skipped, never imputed.  Raises
    :class:`DomainError` when the window lies entirely outside the corpus
    span and :class:`EmptyWindowError` when the window overlaps the span
    but no row falls inside it.
    """
    if half_width < 0:
        raise DomainError("half_width must be >= 0")
    center = np.datetime64(as_date(center), "D")
    pad = np.timedelta64(half_width, "D")
    if center + pad < m.first_date or center - pad > m.last_date:
        raise DomainError(
            f"window around {center} lies outside corpus span "
            f"[{m.first_date}, {m.last_date}]"
        )
    rows = m.row_range(center - pad, center + pad)
    if rows.shape[0] == 0:
        raise EmptyWindowError(f"no rows within {half_width} days of {center}")
    return rows
