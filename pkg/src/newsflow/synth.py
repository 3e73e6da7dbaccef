"""Synthetic corpus generation with planted event signatures.

The generator is the independent oracle for every pipeline-level test:
background rows are i.i.d. symmetric Dirichlet draws, and each planted
event mixes its days toward a reserved event topic following a shape
profile.  Mixing keeps every row on the simplex.

Depth is an effect size measured against the background stream's own JSD
noise: "depth 3" means the peak JSD response of the event sits three
standard deviations above the divergence floor of the undisturbed stream.
The mixing weight that achieves a given depth is found by inverting a
seeded, cached response calibration, so generation stays a pure function
of the plan.
"""

from __future__ import annotations

import datetime as dt
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import EventRecord, Series, ThetaMatrix, as_date, z_normalize
from .errors import DomainError
from .jumpflow import FlowParams, JumpConfig

SHAPES = (
    "anticipation_dip",
    "sudden_onset_plateau",
    "symmetric_dip",
    "noise_only",
    "release_after",
)


@dataclass(frozen=True)
class ArchetypeSpec:
    """Shape of one planted event's influence on the topic stream."""

    shape: str
    onset_lead: int = 14
    recovery: int = 14
    depth: float = 3.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown shape {self.shape!r}; options: {SHAPES}")
        if self.depth < 0:
            raise DomainError("depth must be >= 0")
        if self.onset_lead < 0 or self.recovery < 0:
            raise DomainError("onset_lead and recovery must be >= 0")


@dataclass(frozen=True)
class SynthPlan:
    """Full recipe for one synthetic source; a pure function of its fields."""

    n_topics: int = 24
    n_days: int = 400
    concentration: float = 5.0
    events: tuple = ()
    seed: int = 0
    source_id: str = "synth"
    start: dt.date = dt.date(1960, 1, 1)
    event_topic_pool: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "start", as_date(self.start))
        events = tuple((as_date(d), spec) for d, spec in self.events)
        for d, _ in events:
            day = (d - self.start).days
            if not 0 <= day < self.n_days:
                raise DomainError(f"event date {d} outside the {self.n_days}-day plan")
        object.__setattr__(self, "events", events)
        pool = self.event_topic_pool
        if pool is None:
            pool = max(len(events), 1)
        if pool < 1 or pool > self.n_topics - 2:
            raise DomainError(
                f"event topic pool {pool} does not fit {self.n_topics} topics"
            )
        object.__setattr__(self, "event_topic_pool", pool)


# Calibration is a property of (n_topics, concentration) alone; a fixed
# internal seed keeps it independent of any plan and cacheable.
_CAL_SEED = 0x5EEDCA1
_CAL_PAIRS = 768
_CAL_GRID = (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9)


def _pair_jsd_values(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m = 0.5 * (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0, a * np.log2(np.where(a > 0, a / m, 1.0)), 0.0)
        tb = np.where(b > 0, b * np.log2(np.where(b > 0, b / m, 1.0)), 0.0)
    return np.maximum(0.5 * ta.sum(axis=1) + 0.5 * tb.sum(axis=1), 0.0)


@lru_cache(maxsize=32)
def _jsd_response(n_topics: int, concentration: float):
    """Background JSD sigma and the mixing-weight response curve."""
    seq = np.random.SeedSequence([_CAL_SEED, n_topics, int(concentration * 1e6)])
    rng = np.random.default_rng(seq)
    alpha = np.full(n_topics, concentration)
    a = rng.dirichlet(alpha, _CAL_PAIRS)
    b = rng.dirichlet(alpha, _CAL_PAIRS)
    base = _pair_jsd_values(a, b)
    sigma = float(base.std())
    deltas = []
    for m in _CAL_GRID:
        mixed = a.copy()
        mixed[:, 0] += m
        mixed /= 1.0 + m
        deltas.append(float(_pair_jsd_values(mixed, b).mean() - base.mean()))
    # Monte-Carlo jitter can break monotonicity at tiny weights; interp
    # needs an increasing response curve.
    deltas = np.maximum.accumulate(np.array(deltas))
    return sigma, np.array(_CAL_GRID), deltas


def background_jsd_sigma(n_topics: int, concentration: float) -> float:
    """Std of the single-pair JSD between undisturbed background rows."""
    return _jsd_response(n_topics, concentration)[0]


def depth_to_mixing(depth: float, n_topics: int, concentration: float) -> float:
    """Mixing weight whose JSD response is ``depth`` background sigmas."""
    if depth == 0:
        return 0.0
    sigma, grid, deltas = _jsd_response(n_topics, concentration)
    target = depth * sigma
    if target >= deltas[-1]:
        warnings.warn(
            f"depth {depth} saturates the mixing response; clipping to {grid[-1]}"
        )
        return float(grid[-1])
    return float(np.interp(target, deltas, grid))


def _mixing_weights(spec: ArchetypeSpec, taus: np.ndarray, peak: float) -> np.ndarray:
    """Mixing weight toward the event topic at signed day offsets ``taus``."""
    lead = max(spec.onset_lead, 1)
    rec = max(spec.recovery, 1)
    w = np.zeros(taus.size)
    t = taus.astype(np.float64)
    if spec.shape == "noise_only":
        return w
    if spec.shape == "anticipation_dip":
        ramp = (t >= -spec.onset_lead) & (t <= 0)
        w[ramp] = peak * (1.0 + t[ramp] / lead)
        after = t > 0
        w[after] = peak * np.exp(-t[after] / rec)
    elif spec.shape == "sudden_onset_plateau":
        w[(t >= 0) & (t <= spec.recovery)] = peak
    elif spec.shape == "release_after":
        w[(t >= -spec.onset_lead) & (t <= 0)] = peak
        after = t > 0
        w[after] = peak * np.exp(-t[after] / rec)
    elif spec.shape == "symmetric_dip":
        ramp = (t >= -spec.onset_lead) & (t <= 0)
        w[ramp] = peak * (1.0 + t[ramp] / lead)
        fall = (t > 0) & (t <= spec.recovery)
        w[fall] = peak * (1.0 - t[fall] / rec)
    # Exponential tails are cut at 2% of peak to bound each event's support.
    w[w < peak * 0.02] = 0.0
    return w


def _event_topic(plan: SynthPlan, event_index: int) -> int:
    return plan.n_topics - 1 - (event_index % plan.event_topic_pool)


def generate(plan: SynthPlan) -> ThetaMatrix:
    """Materialize a plan into a daily ThetaMatrix.

    Overlapping event windows compose additively before renormalization,
    with a warning, so the result always stays on the simplex.
    """
    rng = np.random.default_rng(plan.seed)
    k = plan.n_topics
    bg = rng.dirichlet(np.full(k, plan.concentration), size=plan.n_days)
    added = np.zeros((plan.n_days, k))
    touched = np.zeros(plan.n_days, dtype=np.int64)
    span = 6 * max((max(s.onset_lead, s.recovery) for _, s in plan.events), default=0)
    taus = np.arange(-span, span + 1)
    for idx, (date, spec) in enumerate(plan.events):
        peak = depth_to_mixing(spec.depth, k, plan.concentration)
        w = _mixing_weights(spec, taus, peak)
        nz = w > 0
        if not np.any(nz):
            continue
        days = (date - plan.start).days + taus[nz]
        inside = (days >= 0) & (days < plan.n_days)
        days = days[inside]
        added[days, _event_topic(plan, idx)] += w[nz][inside]
        touched[days] += 1
    if np.any(touched > 1):
        warnings.warn(
            f"{plan.source_id}: {int((touched > 1).sum())} days under "
            "overlapping events; effects composed additively"
        )
    rows = (bg + added) / (1.0 + added.sum(axis=1, keepdims=True))
    dates = [plan.start + dt.timedelta(days=int(i)) for i in range(plan.n_days)]
    return ThetaMatrix(plan.source_id, dates, rows)


def planted_flow_profile(
    spec: ArchetypeSpec, flow_half_width: int, window_half_width: int
) -> Series:
    """The z-normalized flow shape an archetype is expected to produce.

    The JSD between the focal window and the window at offset J grows, to
    leading order, with the squared difference of their mean event-topic
    masses; this evaluates that proxy on the flow's offset grid.
    """
    w = flow_half_width
    hw = window_half_width
    pad = w + 2 * hw
    taus = np.arange(-pad, pad + 1)
    m = _mixing_weights(spec, taus, 1.0)
    offsets = np.arange(-w, w + 1)
    profile = np.empty(offsets.size)
    js = np.arange(-hw, hw + 1)
    for pos, off in enumerate(offsets):
        base = m[pad + js]
        jumped = m[pad + off + js]
        profile[pos] = np.mean((base - jumped) ** 2)
    return z_normalize(Series(profile, offsets))


# Four maximally contrastive level sequences: step-down, step-up, narrow
# centered dip, and a full-width ramp with slow release.  Nearer parameter
# choices produce U-shapes that collapse into one cluster under warping.
BENCHMARK_SHAPES = (
    ArchetypeSpec("sudden_onset_plateau", onset_lead=0, recovery=40),
    ArchetypeSpec("release_after", onset_lead=40, recovery=2),
    ArchetypeSpec("symmetric_dip", onset_lead=9, recovery=9),
    ArchetypeSpec("anticipation_dip", onset_lead=40, recovery=20),
)

BENCHMARK_SOURCES = 9
BENCHMARK_EVENTS = 60
BENCHMARK_SPACING = 88
BENCHMARK_LEAD_IN = 120
BENCHMARK_TOPICS = 24
BENCHMARK_POOL = 12
BENCHMARK_CONCENTRATION = 5.0

# Analysis settings the benchmark is calibrated for: a sharp 11-day pairing
# window keeps the step edges crisp, and a length-5 rolling mean knocks the
# per-offset noise down without blurring the narrow dip.
BENCHMARK_FLOW_PARAMS = FlowParams(
    jump=JumpConfig(half_width=5, smoothing=5), flow_half_width=28
)


def standard_benchmark(seed: int = 0):
    """The stock pipeline benchmark: 9 sources, 60 events, 4 archetypes.

    Every source shares the same planted events (15 per archetype, depth 3
    sigma) over independently drawn backgrounds.  Returns the corpora, the
    event catalog and the planted archetype labels (1..4, aligned with the
    events, in event order).
    """
    start = dt.date(1950, 1, 1)
    n_days = BENCHMARK_LEAD_IN * 2 + BENCHMARK_SPACING * (BENCHMARK_EVENTS - 1)
    events = []
    labels = []
    specs = []
    for i in range(BENCHMARK_EVENTS):
        day = BENCHMARK_LEAD_IN + BENCHMARK_SPACING * i
        events.append(
            EventRecord(f"event-{i + 1:02d}", start + dt.timedelta(days=day))
        )
        labels.append(i % len(BENCHMARK_SHAPES) + 1)
        specs.append(BENCHMARK_SHAPES[i % len(BENCHMARK_SHAPES)])
    seeds = np.random.SeedSequence(seed).generate_state(BENCHMARK_SOURCES)
    corpora = []
    for s in range(BENCHMARK_SOURCES):
        plan = SynthPlan(
            n_topics=BENCHMARK_TOPICS,
            n_days=n_days,
            concentration=BENCHMARK_CONCENTRATION,
            events=tuple((e.date, spec) for e, spec in zip(events, specs)),
            seed=int(seeds[s]),
            source_id=f"src{s + 1:02d}",
            start=start,
            event_topic_pool=BENCHMARK_POOL,
        )
        corpora.append(generate(plan))
    return corpora, events, np.array(labels)
