"""Jump-entropy curves and per-event flow signatures.

A jump-entropy curve measures, for each signed day-offset J on a grid, the
mean JSD between the window of pages around a focal date and the window
around ``focal + J``.  Negative offsets compare against the past, positive
against the future.  An event flow is the dense (step-1) curve around an
event date, gap-filled, optionally smoothed, and z-normalized: the event's
signature in the information stream.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .core import EventRecord, Series, ThetaMatrix, as_date, rolling_mean, z_normalize
from .errors import CoverageError, DomainError, EmptyCurveError


@dataclass(frozen=True)
class JumpConfig:
    """Window and jump-grid geometry for curve computation.

    The grid runs from ``jump_min`` to ``jump_max`` in steps of
    ``jump_step`` anchored at ``jump_min``, so offset 0 belongs to the grid
    exactly when ``jump_min`` is divisible by ``jump_step``.  ``smoothing``
    is consumed by flow extraction (and display), never by raw curves.
    """

    half_width: int = 7
    jump_min: int = -1500
    jump_max: int = 1500
    jump_step: int = 15
    smoothing: int | None = None

    def __post_init__(self):
        if self.jump_min >= self.jump_max:
            raise DomainError("jump_min must be < jump_max")
        if self.jump_step < 1:
            raise DomainError("jump_step must be >= 1")
        if self.half_width < 0:
            raise DomainError("half_width must be >= 0")
        if self.smoothing is not None and self.smoothing < 1:
            raise DomainError("smoothing length must be >= 1")

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.jump_min, self.jump_max + 1, self.jump_step)


@dataclass(frozen=True)
class JumpEntropyCurve:
    """Mean JSD per jump offset around one focal date.

    Only supported offsets are stored; an offset whose jumped window holds
    no rows is absent, never zero-filled.  ``support`` counts the page
    pairs actually averaged at each offset.
    """

    source_id: str
    focal_date: dt.date
    offsets: np.ndarray
    values: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        if not (len(self.offsets) == len(self.values) == len(self.support)):
            raise DomainError("offsets, values and support must align")
        if len(self.offsets) > 1 and not np.all(np.diff(self.offsets) > 0):
            raise DomainError("offsets must be strictly increasing")
        if np.any(self.values < 0):
            raise DomainError("curve values must be non-negative")
        if np.any(self.support < 1):
            raise DomainError("stored offsets must have support >= 1")

    def __len__(self):
        return len(self.offsets)

    def as_series(self) -> Series:
        return Series(self.values, self.offsets)


@dataclass(frozen=True)
class EventFlow:
    """Z-normalized curve slice centered on an event, tagged by source.

    ``offsets`` always run -W..+W inclusive; ``support`` is 0 at offsets
    whose value was interpolated (including the dropped self-comparison at
    offset 0).
    """

    event: EventRecord
    source_id: str
    offsets: np.ndarray
    values: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        if not (len(self.offsets) == len(self.values) == len(self.support)):
            raise DomainError("offsets, values and support must align")

    def __len__(self):
        return len(self.values)

    @property
    def half_width(self) -> int:
        return int(self.offsets[-1])

    def as_series(self) -> Series:
        return Series(self.values, self.offsets)


@dataclass(frozen=True)
class FlowParams:
    """Flow extraction parameters shared by the batch and study drivers."""

    jump: JumpConfig = field(default_factory=JumpConfig)
    flow_half_width: int = 28


@dataclass(frozen=True)
class CoverageMiss:
    source_id: str
    event: EventRecord
    reason: str


@dataclass
class FlowTable:
    """Batch extraction result: flows in (source, event-date) order."""

    flows: list
    misses: list


def _offset_stats(m: ThetaMatrix, focal: np.datetime64, offsets, half_width: int):
    """Mean paired JSD and pair count per offset; NaN where unsupported."""
    pad = np.timedelta64(half_width, "D")
    base_lo = np.searchsorted(m.dates, focal - pad, side="left")
    base_hi = np.searchsorted(m.dates, focal + pad, side="right")
    base = m.rows[base_lo:base_hi]
    values = np.full(len(offsets), np.nan)
    support = np.zeros(len(offsets), dtype=np.int64)
    if base.shape[0] == 0:
        return values, support
    for pos, off in enumerate(offsets):
        target = focal + np.timedelta64(int(off), "D")
        if target + pad < m.first_date or target - pad > m.last_date:
            continue
        lo = np.searchsorted(m.dates, target - pad, side="left")
        hi = np.searchsorted(m.dates, target + pad, side="right")
        if hi <= lo:
            continue
        other = m.rows[lo:hi]
        w = min(base.shape[0], other.shape[0])
        values[pos] = _backend.paired_jsd_mean(base[:w], other[:w])
        support[pos] = w
    return values, support


def jump_entropy_curve(
    m: ThetaMatrix, focal, cfg: JumpConfig = JumpConfig()
) -> JumpEntropyCurve:
    """Jump-entropy curve of one source around one focal date.

    For each grid offset J the window around the focal date is paired with
    the window around ``focal + J``: both windows are sorted by date,
    matched by rank, truncated to the shorter one, and the JSDs of the
    matched row pairs are averaged.  Offsets whose jumped window lies
    outside the corpus or holds no rows are dropped from the curve.
    """
    focal_date = as_date(focal)
    focal64 = np.datetime64(focal_date, "D")
    if focal64 < m.first_date or focal64 > m.last_date:
        raise DomainError(
            f"focal date {focal_date} outside corpus span "
            f"[{m.first_date}, {m.last_date}]"
        )
    offsets = cfg.grid
    values, support = _offset_stats(m, focal64, offsets, cfg.half_width)
    keep = support > 0
    if not np.any(keep):
        raise EmptyCurveError(
            f"no supported jump offset around {focal_date} in {m.source_id}"
        )
    return JumpEntropyCurve(
        source_id=m.source_id,
        focal_date=focal_date,
        offsets=offsets[keep],
        values=values[keep],
        support=support[keep],
    )


def event_flow(
    m: ThetaMatrix,
    e: EventRecord,
    flow_half_width: int = 28,
    cfg: JumpConfig = JumpConfig(),
) -> EventFlow:
    """The event's flow signature in one source.

    Computes the dense jump-entropy curve on offsets -W..+W (step 1) around
    the event date.  The self-comparison at offset 0 is dropped and treated
    as a gap; interior gaps are filled by linear interpolation, then the
    optional rolling mean and z-normalization are applied.  Unsupported
    offsets at either end mean the source does not cover the event and
    raise :class:`CoverageError`.
    """
    if flow_half_width < 1:
        raise DomainError("flow_half_width must be >= 1")
    focal64 = np.datetime64(e.date, "D")
    if focal64 < m.first_date or focal64 > m.last_date:
        raise CoverageError(
            f"{m.source_id} does not cover {e.name} ({e.date}): outside span"
        )
    offsets = np.arange(-flow_half_width, flow_half_width + 1)
    values, support = _offset_stats(m, focal64, offsets, cfg.half_width)
    # Offset 0 compares the window with itself and carries no information.
    zero = flow_half_width
    values[zero] = np.nan
    support[zero] = 0
    measured = support > 0
    if not measured[0] or not measured[-1]:
        raise CoverageError(
            f"{m.source_id} does not cover {e.name} ({e.date}): "
            f"no data at offset {-flow_half_width if not measured[0] else flow_half_width}"
        )
    filled = np.interp(offsets, offsets[measured], values[measured])
    series = Series(filled, offsets)
    if cfg.smoothing is not None and cfg.smoothing > 1:
        series = rolling_mean(series, cfg.smoothing)
    series = z_normalize(series)
    return EventFlow(
        event=e,
        source_id=m.source_id,
        offsets=offsets,
        values=series.values,
        support=support,
    )


def batch_event_flows(
    corpora, events, params: FlowParams = FlowParams(), workers: int = 1
) -> FlowTable:
    """One flow per covered (source, event) pair, deterministically ordered.

    Coverage misses are collected per pair, never fatal.  Extraction is an
    embarrassingly parallel map; results merge in (source, event-date) order
    regardless of ``workers``.
    """
    corpora = list(corpora)
    events = list(events)
    if not corpora:
        raise DomainError("no corpora given")
    pairs = [
        (m, e)
        for m in sorted(corpora, key=lambda c: c.source_id)
        for e in sorted(events, key=lambda ev: (ev.date, ev.name))
    ]

    def extract(pair):
        m, e = pair
        try:
            return event_flow(m, e, params.flow_half_width, params.jump)
        except CoverageError as exc:
            return CoverageMiss(m.source_id, e, str(exc))

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(extract, pairs))
    else:
        results = [extract(p) for p in pairs]
    flows = [r for r in results if isinstance(r, EventFlow)]
    misses = [r for r in results if isinstance(r, CoverageMiss)]
    return FlowTable(flows, misses)
