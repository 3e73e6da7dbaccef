"""Command-line surface: ingest, orchestrate, persist, plot.

Configuration precedence: defaults < config file (``--config``, which may
be a previous run's manifest) < ``NEWSFLOW_*`` environment variables <
explicit flags.  Every run writes a manifest echoing the resolved config,
input digests and outputs; rerunning a manifest reproduces all numeric
artifacts byte for byte.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io, plots
from .clustering import pairwise_dtw, select_model
from .errors import (
    ConfigError,
    CoverageError,
    EmptyCurveError,
    EmptyWindowError,
    IngestionError,
    NewsflowError,
)
from .jumpflow import FlowParams, JumpConfig, batch_event_flows, jump_entropy_curve
from .studies import decade_aggregate, query_by_template, random_date_baseline
from .synth import (
    BENCHMARK_FLOW_PARAMS,
    BENCHMARK_SHAPES,
    SynthPlan,
    generate,
    standard_benchmark,
)

ENV_PREFIX = "NEWSFLOW_"


@dataclass
class RunConfig:
    """Resolved settings for one CLI run."""

    input_dir: str | None = None
    events: str | None = None
    out: str = "out"
    seed: int = 0
    window: int = 7
    flow_window: int = 28
    jump_min: int = -1500
    jump_max: int = 1500
    jump_step: int = 15
    smoothing: int | None = None
    k_min: int = 2
    k_max: int = 8
    linkages: tuple = ("average",)
    exclude_sources: tuple = ()
    cluster_space: str = "dtw"
    n_dates: int = 200
    baseline_window: int = 30
    template: str | None = None
    stride: int = 1
    band: int | None = None
    preset: str = "small"
    workers: int = 1

    def jump_config(self, half_width=None) -> JumpConfig:
        return JumpConfig(
            half_width=self.window if half_width is None else half_width,
            jump_min=self.jump_min,
            jump_max=self.jump_max,
            jump_step=self.jump_step,
            smoothing=self.smoothing,
        )

    def flow_params(self) -> FlowParams:
        return FlowParams(jump=self.jump_config(), flow_half_width=self.flow_window)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["linkages"] = list(self.linkages)
        d["exclude_sources"] = list(self.exclude_sources)
        return d


_INT_FIELDS = {
    "seed",
    "window",
    "flow_window",
    "jump_min",
    "jump_max",
    "jump_step",
    "smoothing",
    "k_min",
    "k_max",
    "n_dates",
    "baseline_window",
    "stride",
    "band",
    "workers",
}
_LIST_FIELDS = {"linkages", "exclude_sources"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, environment and flags into a RunConfig."""
    values = {}
    if args.config:
        values.update(io.read_config_file(args.config))
    for field in dataclasses.fields(RunConfig):
        env = os.environ.get(ENV_PREFIX + field.name.upper())
        if env is not None:
            values[field.name] = env
    for field in dataclasses.fields(RunConfig):
        flag = getattr(args, field.name, None)
        if flag is not None:
            values[field.name] = flag
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in list(values):
        if values[key] is None:
            continue
        if key in _INT_FIELDS and not isinstance(values[key], int):
            try:
                values[key] = int(values[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be an integer, got {values[key]!r}")
        if key in _LIST_FIELDS:
            v = values[key]
            if isinstance(v, str):
                v = [s for s in v.split(",") if s]
            values[key] = tuple(v)
    cfg = RunConfig(**values)
    if cfg.k_min < 2 or cfg.k_max < cfg.k_min:
        raise ConfigError(f"bad k range [{cfg.k_min}, {cfg.k_max}]")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def _require_inputs(cfg: RunConfig, need_events: bool = True):
    if not cfg.input_dir:
        raise ConfigError("an input directory is required (--input-dir)")
    input_dir = Path(cfg.input_dir)
    if not input_dir.is_dir():
        raise ConfigError(f"input directory {input_dir} does not exist")
    theta_paths = sorted(input_dir.glob("theta_*.csv"))
    if not theta_paths:
        raise ConfigError(f"no theta_*.csv files in {input_dir}")
    corpora = [io.ingest_theta(p, p.stem.removeprefix("theta_")) for p in theta_paths]
    corpora = [m for m in corpora if m.source_id not in cfg.exclude_sources]
    if not corpora:
        raise ConfigError("all sources excluded")
    events_path = None
    events = []
    if need_events:
        events_path = Path(cfg.events) if cfg.events else io.bundled_events_path()
        if not events_path.exists():
            raise ConfigError(f"events file {events_path} does not exist")
        events = io.ingest_events(events_path)
    return corpora, events, theta_paths, events_path


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-." else "_" for c in name)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    outputs = []
    if cfg.preset == "benchmark":
        corpora, events, labels = standard_benchmark(cfg.seed)
    elif cfg.preset == "small":
        corpora, events, labels = _small_benchmark(cfg.seed)
    else:
        raise ConfigError(f"unknown preset {cfg.preset!r} (small, benchmark)")
    for m in corpora:
        path = out / f"theta_{_slug(m.source_id)}.csv"
        io.emit_theta(m, path)
        outputs.append(path)
    events_path = out / "events.csv"
    io.emit_events(events, events_path)
    outputs.append(events_path)
    labels_path = out / "planted_labels.csv"
    with labels_path.open("w") as fh:
        fh.write("event,label\n")
        for e, lab in zip(events, labels):
            fh.write(f"{e.name},{int(lab)}\n")
    outputs.append(labels_path)
    io.write_manifest(out, "simulate", cfg.as_dict(), [], outputs)
    print(f"simulated {len(corpora)} sources, {len(events)} events -> {out}")
    return 0


def _small_benchmark(seed: int):
    """A 3-source, 12-event miniature of the standard benchmark."""
    import datetime as dt

    start = dt.date(1960, 1, 1)
    spacing, lead_in = 88, 120
    events, labels, specs = [], [], []
    from .core import EventRecord

    for i in range(12):
        events.append(
            EventRecord(
                f"event-{i + 1:02d}",
                start + dt.timedelta(days=lead_in + spacing * i),
            )
        )
        labels.append(i % 4 + 1)
        specs.append(BENCHMARK_SHAPES[i % 4])
    n_days = 2 * lead_in + spacing * 11
    seeds = np.random.SeedSequence(seed).generate_state(3)
    corpora = [
        generate(
            SynthPlan(
                n_topics=24,
                n_days=n_days,
                concentration=5.0,
                events=tuple((e.date, s) for e, s in zip(events, specs)),
                seed=int(seeds[i]),
                source_id=f"src{i + 1:02d}",
                start=start,
                event_topic_pool=12,
            )
        )
        for i in range(3)
    ]
    return corpora, events, np.array(labels)


def cmd_entropy(cfg: RunConfig) -> int:
    corpora, events, theta_paths, events_path = _require_inputs(cfg)
    out = _out_dir(cfg)
    outputs = []
    skipped = []
    for m in corpora:
        for e in events:
            try:
                curve = jump_entropy_curve(m, e.date, cfg.jump_config())
            except (NewsflowError,) as exc:
                skipped.append((m.source_id, e.name, str(exc)))
                continue
            path = out / f"curve_{_slug(m.source_id)}__{_slug(e.name)}.csv"
            io.emit_curve(curve, path)
            outputs.append(path)
    if not outputs:
        raise EmptyCurveError("no curve could be computed for any (source, event)")
    if skipped:
        report = out / "skipped.csv"
        with report.open("w") as fh:
            fh.write("source,event,reason\n")
            for src, ev, why in skipped:
                fh.write(f'{src},{ev},"{why}"\n')
        outputs.append(report)
    io.write_manifest(
        out, "entropy", cfg.as_dict(), theta_paths + [events_path], outputs
    )
    print(f"wrote {len(outputs)} curve files -> {out}")
    return 0


def cmd_flows(cfg: RunConfig) -> int:
    corpora, events, theta_paths, events_path = _require_inputs(cfg)
    out = _out_dir(cfg)
    table = batch_event_flows(corpora, events, cfg.flow_params(), workers=cfg.workers)
    outputs = []
    for f in table.flows:
        path = out / f"flow_{_slug(f.source_id)}__{_slug(f.event.name)}.csv"
        io.emit_curve(f, path)
        outputs.append(path)
    misses_path = out / "coverage_misses.csv"
    with misses_path.open("w") as fh:
        fh.write("source,event,reason\n")
        for miss in table.misses:
            fh.write(f'{miss.source_id},{miss.event.name},"{miss.reason}"\n')
    outputs.append(misses_path)
    io.write_manifest(out, "flows", cfg.as_dict(), theta_paths + [events_path], outputs)
    print(f"wrote {len(table.flows)} flows ({len(table.misses)} misses) -> {out}")
    return 0


def cmd_cluster(cfg: RunConfig) -> int:
    corpora, events, theta_paths, events_path = _require_inputs(cfg)
    out = _out_dir(cfg)
    table = batch_event_flows(corpora, events, cfg.flow_params(), workers=cfg.workers)
    if len(table.flows) < 2:
        raise CoverageError("fewer than 2 flows could be extracted")
    dm = pairwise_dtw(table.flows, band=cfg.band)
    model = select_model(
        dm,
        range(cfg.k_min, min(cfg.k_max, len(dm) - 1) + 1),
        linkage_options=cfg.linkages,
        flows=table.flows,
        space=cfg.cluster_space,
    )
    outputs = []
    dm_path = out / "distance_matrix.csv"
    io.emit_distance_matrix(dm, dm_path)
    outputs.append(dm_path)
    model_path = out / "model.json"
    io.emit_model(model, model_path)
    outputs.append(model_path)
    for i, bary in enumerate(model.archetypes, start=1):
        path = out / f"archetype_{i}.csv"
        length = len(bary.values)
        if length % 2 == 1:
            offs = range(-(length // 2), length // 2 + 1)
        else:
            offs = range(length)
        with path.open("w") as fh:
            fh.write("offset,value\n")
            for off, v in zip(offs, bary.values):
                fh.write(f"{off},{float(v)!r}\n")
        outputs.append(path)
    flows_meta = out / "flow_index.csv"
    with flows_meta.open("w") as fh:
        fh.write("index,event,source,label\n")
        for i, (f, lab) in enumerate(zip(table.flows, model.labels)):
            fh.write(f"{i},{f.event.name},{f.source_id},{int(lab)}\n")
    outputs.append(flows_meta)
    # the underlying flows make the run self-contained for audit and plotting
    for f in table.flows:
        path = out / f"flow_{_slug(f.source_id)}__{_slug(f.event.name)}.csv"
        io.emit_curve(f, path)
        outputs.append(path)
    io.write_manifest(
        out, "cluster", cfg.as_dict(), theta_paths + [events_path], outputs
    )
    print(
        f"k={model.k} linkage={model.linkage} silhouette={model.silhouette:.4f} -> {out}"
    )
    return 0


def cmd_baseline(cfg: RunConfig) -> int:
    corpora, _, theta_paths, _ = _require_inputs(cfg, need_events=False)
    out = _out_dir(cfg)
    params = FlowParams(
        jump=cfg.jump_config(), flow_half_width=cfg.baseline_window
    )
    table = random_date_baseline(corpora, cfg.n_dates, cfg.seed, params)
    decades = decade_aggregate(table)
    outputs = []
    dev_path = out / "deviations.csv"
    io.emit_deviations(table, dev_path)
    outputs.append(dev_path)
    dec_path = out / "decades.csv"
    io.emit_decades(decades, dec_path)
    outputs.append(dec_path)
    io.write_manifest(out, "baseline", cfg.as_dict(), theta_paths, outputs)
    print(f"baseline over {cfg.n_dates} dates, {len(table)} rows -> {out}")
    return 0


def cmd_query(cfg: RunConfig) -> int:
    corpora, _, theta_paths, _ = _require_inputs(cfg, need_events=False)
    if not cfg.template:
        raise ConfigError("a template file is required (--template)")
    template_path = Path(cfg.template)
    if not template_path.exists():
        raise ConfigError(f"template {template_path} does not exist")
    _, tvalues = io.ingest_series(template_path)
    out = _out_dir(cfg)
    matches = []
    for m in corpora:
        matches.extend(
            query_by_template(
                m, tvalues, stride=cfg.stride, params=cfg.flow_params(), band=cfg.band
            )
        )
    matches_path = out / "matches.csv"
    io.emit_matches(matches, matches_path)
    io.write_manifest(
        out, "query", cfg.as_dict(), theta_paths + [template_path], [matches_path]
    )
    print(f"wrote {len(matches)} matches -> {out}")
    return 0


def _load_flow_files(run_dir: Path):
    from types import SimpleNamespace

    from .core import EventRecord

    flows = []
    for path in sorted(run_dir.glob("flow_*__*.csv")):
        src, event = path.stem.removeprefix("flow_").split("__", 1)
        offsets, values = io.ingest_series(path)
        flows.append(
            SimpleNamespace(
                event=EventRecord(event, "1900-01-01"),
                source_id=src,
                offsets=offsets,
                values=values,
            )
        )
    return flows


def cmd_plot(cfg: RunConfig) -> int:
    """Render whatever artifacts exist in the run directory."""
    run_dir = Path(cfg.out)
    if not run_dir.is_dir():
        raise ConfigError(f"run directory {run_dir} does not exist")
    made = []
    flows = _load_flow_files(run_dir)
    if flows:
        made.append(plots.plot_flows(flows, run_dir / "flows.svg"))
        made.extend(_plot_consensus_files(run_dir, flows))
    curves = []
    for path in sorted(run_dir.glob("curve_*__*.csv"))[:16]:
        from types import SimpleNamespace

        src, event = path.stem.removeprefix("curve_").split("__", 1)
        offsets, values = io.ingest_series(path)
        curves.append(
            SimpleNamespace(
                source_id=src, focal_date=event, offsets=offsets, values=values
            )
        )
    if curves:
        made.append(plots.plot_curves(curves, run_dir / "curves.svg", cfg.smoothing or 5))
    model_path = run_dir / "model.json"
    if model_path.exists():
        made.extend(_plot_model_files(run_dir, model_path))
    dec_path = run_dir / "decades.csv"
    if dec_path.exists():
        made.append(_plot_decades_file(run_dir, dec_path))
    dev_path = run_dir / "deviations.csv"
    if dev_path.exists():
        made.append(_plot_heatmap_file(run_dir, dev_path))
    if not made:
        raise ConfigError(f"nothing to plot in {run_dir}")
    print(f"wrote {len(made)} plots -> {run_dir}")
    return 0


def _plot_consensus_files(run_dir: Path, flows, max_events: int = 2):
    """DBA and soft-DBA consensus panels for the first multi-source events."""
    from .studies import consensus_flow

    by_event = {}
    for f in flows:
        by_event.setdefault(f.event.name, []).append(f)
    made = []
    for event_name in sorted(by_event):
        members = by_event[event_name]
        if len(members) < 2:
            continue
        barys = {
            "DBA": consensus_flow(members, mode="dba"),
            "soft-DBA": consensus_flow(members, mode="soft_dba"),
        }
        made.append(
            plots.plot_consensus(
                members, barys, run_dir / f"consensus_{_slug(event_name)}.svg"
            )
        )
        if len(made) >= max_events:
            break
    return made


def _plot_model_files(run_dir: Path, model_path: Path):
    from types import SimpleNamespace

    doc = json.loads(model_path.read_text())
    model = SimpleNamespace(
        k=doc["k"],
        labels=np.array(doc["labels"]),
        silhouette=doc["silhouette"],
        stress=doc["stress"],
        embedding=None if doc["embedding"] is None else np.array(doc["embedding"]),
        archetypes=None
        if doc["archetypes"] is None
        else [SimpleNamespace(values=np.array(a["values"])) for a in doc["archetypes"]],
        dendrogram=SimpleNamespace(
            to_linkage=lambda: np.array(doc["merges"], dtype=np.float64)
        ),
    )
    flows = _load_flow_files(run_dir)
    made = []
    if model.embedding is not None:
        made.append(plots.plot_embedding(model, run_dir / "embedding.svg"))
    if flows and len(flows) == len(model.labels):
        made.append(plots.plot_model(model, flows, run_dir / "clusters.svg"))
    return made


def _plot_decades_file(run_dir: Path, dec_path: Path):
    import csv as _csv
    from types import SimpleNamespace

    rows = []
    with dec_path.open() as fh:
        for rec in _csv.DictReader(fh):
            rows.append(
                SimpleNamespace(
                    source_id=rec["source"],
                    decade=int(rec["decade"]),
                    mean=float(rec["mean"]),
                    ci_low=float(rec["ci_low"]),
                    ci_high=float(rec["ci_high"]),
                    n=int(rec["n"]),
                )
            )
    return plots.plot_decades(rows, run_dir / "decades.svg")


def _plot_heatmap_file(run_dir: Path, dev_path: Path):
    import csv as _csv
    import datetime as dt
    from types import SimpleNamespace

    rows = []
    with dev_path.open() as fh:
        for rec in _csv.DictReader(fh):
            rows.append(
                SimpleNamespace(
                    source_id=rec["source"],
                    anchor_date=dt.date.fromisoformat(rec["date"]),
                    anchor_name=rec["anchor"],
                    distance=float(rec["distance"]),
                )
            )
    table = SimpleNamespace(rows=rows)
    return plots.plot_event_heatmap(table, run_dir / "event_heatmap.svg")


COMMANDS = {
    "simulate": cmd_simulate,
    "entropy": cmd_entropy,
    "flows": cmd_flows,
    "cluster": cmd_cluster,
    "baseline": cmd_baseline,
    "query": cmd_query,
    "plot": cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsflow",
        description="Jump-entropy analysis of serial text corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "generate a synthetic corpus with planted events"),
        ("entropy", "jump-entropy curves at event dates"),
        ("flows", "extract per-event flow signatures"),
        ("cluster", "cluster flows into archetypes"),
        ("baseline", "random-date consensus deviations by decade"),
        ("query", "find date ranges matching a template flow"),
        ("plot", "render SVG plots for a run directory"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config or a previous manifest")
        p.add_argument("--input-dir", dest="input_dir", help="directory of theta_*.csv")
        p.add_argument("--events", help="event catalog CSV (name,date)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--window", type=int, help="pairing window half-width (days)")
        p.add_argument("--flow-window", dest="flow_window", type=int)
        p.add_argument("--jump-min", dest="jump_min", type=int)
        p.add_argument("--jump-max", dest="jump_max", type=int)
        p.add_argument("--jump-step", dest="jump_step", type=int)
        p.add_argument("--smoothing", type=int)
        p.add_argument("--k-range", dest="k_range", help="K_MIN:K_MAX")
        p.add_argument("--linkage", dest="linkages", action="append")
        p.add_argument(
            "--exclude-source", dest="exclude_sources", action="append"
        )
        p.add_argument("--cluster-space", dest="cluster_space", choices=["dtw", "embedding"])
        p.add_argument("--n-dates", dest="n_dates", type=int)
        p.add_argument("--baseline-window", dest="baseline_window", type=int)
        p.add_argument("--template")
        p.add_argument("--stride", type=int)
        p.add_argument("--band", type=int)
        p.add_argument("--preset", choices=["small", "benchmark"])
        p.add_argument("--workers", type=int)
    return parser


EXIT_CODES = (
    (ConfigError, 2),
    (IngestionError, 3),
    (CoverageError, 3),
    (EmptyWindowError, 3),
    (EmptyCurveError, 3),
    (NewsflowError, 4),
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "k_range", None):
            try:
                lo, hi = args.k_range.split(":")
                args.k_min, args.k_max = int(lo), int(hi)
            except ValueError:
                raise ConfigError(f"bad --k-range {args.k_range!r}, expected LO:HI")
        else:
            args.k_min = args.k_max = None
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except NewsflowError as exc:
        for klass, code in EXIT_CODES:
            if isinstance(exc, klass):
                break
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(json.dumps(record), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
