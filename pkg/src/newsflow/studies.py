"""Cross-source analyses built on flows: consensus, deviation, querying.

For one anchor (an event or a bare date) the flows of all covering sources
are averaged into a consensus barycenter; each source's DTW distance to it
measures how far that source's reporting deviated.  Random-date baselines
put per-event numbers into context, and templates (archetypes or single
flows) can be slid across a corpus to find look-alike date ranges.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .alignment import Barycenter, dba, dtw_cost, soft_dtw_barycenter
from .core import EventRecord, Series, ThetaMatrix, as_date, z_normalize
from .errors import CoverageError, DomainError
from .jumpflow import EventFlow, FlowParams, event_flow

DATE_ANCHOR_NAME = "@{date}"


@dataclass(frozen=True)
class DeviationRow:
    """One source's DTW distance to one anchor's consensus flow."""

    source_id: str
    anchor_date: dt.date
    anchor_name: str
    distance: float


@dataclass
class DeviationTable:
    rows: list

    def __len__(self):
        return len(self.rows)

    def for_source(self, source_id: str) -> list:
        return [r for r in self.rows if r.source_id == source_id]


@dataclass(frozen=True)
class DecadeRow:
    """Mean deviation of one source over one decade, with a 95% CI.

    The CI uses a t-interval below 30 samples and the normal approximation
    from there on; a single-sample group is flagged degenerate and its CI
    collapses to the mean.
    """

    source_id: str
    decade: int
    mean: float
    ci_low: float
    ci_high: float
    n: int
    degenerate: bool = False


@dataclass(frozen=True)
class QueryMatch:
    source_id: str
    start: dt.date
    cost: float
    rank: int


def consensus_flow(flows_for_anchor, mode: str = "dba", **kwargs) -> Barycenter:
    """Barycenter of one anchor's flows across sources."""
    flows = list(flows_for_anchor)
    if not flows:
        raise DomainError("no flows for this anchor")
    members = [f.values for f in flows]
    if mode == "dba":
        return dba(members, **kwargs)
    if mode == "soft_dba":
        return soft_dtw_barycenter(members, **kwargs)
    raise DomainError(f"unknown consensus mode {mode!r}")


def deviation_from_consensus(flows_for_anchor, consensus: Barycenter) -> list:
    """DTW cost from each source's flow to the anchor's consensus."""
    rows = []
    for f in flows_for_anchor:
        rows.append(
            DeviationRow(
                source_id=f.source_id,
                anchor_date=f.event.date,
                anchor_name=f.event.name,
                distance=dtw_cost(f.values, consensus.values),
            )
        )
    return rows


def event_deviations(
    corpora, events, params: FlowParams = FlowParams(), mode: str = "dba"
) -> DeviationTable:
    """Per-event consensus distances for every covering source.

    Sources that do not cover an event are simply absent from that event's
    rows (the missing cells of the per-event deviation heatmap).
    """
    rows = []
    for e in sorted(events, key=lambda ev: (ev.date, ev.name)):
        flows = []
        for m in sorted(corpora, key=lambda c: c.source_id):
            try:
                flows.append(event_flow(m, e, params.flow_half_width, params.jump))
            except CoverageError:
                continue
        if not flows:
            continue
        consensus = consensus_flow(flows, mode=mode)
        rows.extend(deviation_from_consensus(flows, consensus))
    return DeviationTable(rows)


def random_date_baseline(
    corpora,
    n_dates: int,
    seed: int,
    params: FlowParams | None = None,
    mode: str = "dba",
) -> DeviationTable:
    """Deviation table over uniformly sampled anchor dates.

    Dates are drawn (seeded) from the intersection of the corpus spans,
    shrunk by the flow reach so every source can cover every anchor in a
    gap-free corpus; residual coverage misses are skipped per pair.
    """
    if n_dates < 1:
        raise DomainError("n_dates must be >= 1")
    params = params or FlowParams(flow_half_width=30)
    corpora = sorted(corpora, key=lambda c: c.source_id)
    reach = params.flow_half_width + params.jump.half_width
    lo = max(c.first_date for c in corpora) + np.timedelta64(reach, "D")
    hi = min(c.last_date for c in corpora) - np.timedelta64(reach, "D")
    if hi < lo:
        raise DomainError("corpus spans do not overlap widely enough")
    span_days = int((hi - lo) / np.timedelta64(1, "D")) + 1
    rng = np.random.default_rng(seed)
    offsets = np.sort(rng.integers(0, span_days, size=n_dates))
    rows = []
    for off in offsets:
        anchor_date = as_date(lo + np.timedelta64(int(off), "D"))
        anchor = EventRecord(DATE_ANCHOR_NAME.format(date=anchor_date), anchor_date)
        flows = []
        for m in corpora:
            try:
                flows.append(event_flow(m, anchor, params.flow_half_width, params.jump))
            except CoverageError:
                continue
        if not flows:
            continue
        consensus = consensus_flow(flows, mode=mode)
        rows.extend(deviation_from_consensus(flows, consensus))
    return DeviationTable(rows)


def decade_aggregate(table: DeviationTable) -> list:
    """Per (source, decade) mean deviation with a 95% confidence interval."""
    groups = {}
    for r in table.rows:
        key = (r.source_id, r.anchor_date.year // 10 * 10)
        groups.setdefault(key, []).append(r.distance)
    out = []
    for (source_id, decade) in sorted(groups):
        x = np.asarray(groups[(source_id, decade)])
        n = x.size
        mean = float(x.mean())
        if n == 1:
            out.append(DecadeRow(source_id, decade, mean, mean, mean, 1, True))
            continue
        sd = float(x.std(ddof=1))
        if n < 30:
            crit = stats.t.ppf(0.975, df=n - 1)
        else:
            crit = stats.norm.ppf(0.975)
        half = float(crit * sd / np.sqrt(n))
        out.append(DecadeRow(source_id, decade, mean, mean - half, mean + half, n))
    return out


def query_by_template(
    m: ThetaMatrix,
    template,
    stride: int = 1,
    params: FlowParams | None = None,
    band: int | None = None,
) -> list:
    """Date ranges of a corpus whose flow looks like the template.

    Slides flow extraction across the corpus at ``stride`` days, ranks
    candidates by DTW cost to the (z-normalized) template and suppresses
    overlapping hits within one flow width, keeping the cheapest.  Returns
    :class:`QueryMatch` rows with dense ranks, cost-ascending.
    """
    if stride < 1:
        raise DomainError("stride must be >= 1")
    tvalues = template.values if isinstance(template, (Series, EventFlow)) else np.asarray(template, dtype=np.float64)
    if tvalues.ndim != 1 or tvalues.size < 3 or tvalues.size % 2 == 0:
        raise DomainError("template must be a 1-D series of odd length >= 3")
    tvalues = z_normalize(Series(tvalues)).values
    params = params or FlowParams()
    half = (tvalues.size - 1) // 2
    reach = half + params.jump.half_width
    lo = m.first_date + np.timedelta64(reach, "D")
    hi = m.last_date - np.timedelta64(reach, "D")
    if hi < lo:
        raise DomainError(
            f"corpus span of {m.source_id} is shorter than the flow window"
        )
    candidates = []
    anchor = lo
    while anchor <= hi:
        anchor_date = as_date(anchor)
        probe = EventRecord(DATE_ANCHOR_NAME.format(date=anchor_date), anchor_date)
        try:
            flow = event_flow(m, probe, half, params.jump)
        except CoverageError:
            anchor += np.timedelta64(stride, "D")
            continue
        cost = dtw_cost(flow.values, tvalues, band=band)
        candidates.append((cost, anchor_date))
        anchor += np.timedelta64(stride, "D")
    if not candidates:
        raise DomainError("no feasible query window in the corpus")
    candidates.sort(key=lambda c: (c[0], c[1]))
    width = 2 * half
    kept = []
    for cost, date in candidates:
        if any(abs((date - k[1]).days) <= width for k in kept):
            continue
        kept.append((cost, date))
    return [
        QueryMatch(
            source_id=m.source_id,
            start=date - dt.timedelta(days=half),
            cost=float(cost),
            rank=i + 1,
        )
        for i, (cost, date) in enumerate(kept)
    ]
