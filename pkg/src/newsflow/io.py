"""File formats: theta matrices, event catalogs, run artifacts, manifests.

Everything is plain delimited text plus one JSON manifest per run.  Data
volumes are desk-scale, and text artifacts diff and audit well.  Floats are
written with ``repr`` (shortest round-trip), which makes reruns of the same
configuration byte-identical.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .core import EventRecord, ThetaMatrix, as_date
from .errors import ConfigError, IngestionError

BUNDLED_EVENTS = "events_nl_1950_1995.csv"
ROW_RENORM_TOL = 1e-6


def ingest_theta(path, source_id: str | None = None) -> ThetaMatrix:
    """Read one source's theta matrix from a delimited text file.

    Expected header: ``date,topic_0,...,topic_{K-1}``.  Rows whose sum is
    within 1e-6 of 1 are renormalized; anything further off, negative
    entries, bad dates or duplicate dates fail with the line number.
    """
    path = Path(path)
    rows = []
    dates = []
    seen = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path} is empty") from None
        if len(header) < 3 or header[0].strip().lower() != "date":
            raise IngestionError(
                f"bad header in {path}: expected date,topic_0,...", line=1
            )
        expected = ["topic_%d" % i for i in range(len(header) - 1)]
        got = [h.strip().lower() for h in header[1:]]
        if got != expected:
            raise IngestionError(
                f"bad topic columns in {path}: {header[1:]!r}", line=1
            )
        k = len(expected)
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) != k + 1:
                raise IngestionError(
                    f"expected {k + 1} fields, got {len(rec)}", line=lineno
                )
            try:
                date = dt.date.fromisoformat(rec[0].strip())
            except ValueError:
                raise IngestionError(f"bad date {rec[0]!r}", line=lineno) from None
            if date in seen:
                raise IngestionError(
                    f"duplicate date {date} (first seen line {seen[date]})",
                    line=lineno,
                )
            seen[date] = lineno
            try:
                vals = np.array([float(v) for v in rec[1:]])
            except ValueError:
                raise IngestionError("non-numeric topic value", line=lineno) from None
            if np.any(vals < 0):
                raise IngestionError("negative topic probability", line=lineno)
            total = vals.sum()
            if abs(total - 1.0) > ROW_RENORM_TOL:
                raise IngestionError(
                    f"row sums to {total!r}, off by more than {ROW_RENORM_TOL}",
                    line=lineno,
                )
            if total != 1.0:
                vals = vals / total
            dates.append(date)
            rows.append(vals)
    if not rows:
        raise IngestionError(f"{path} has no data rows")
    order = np.argsort(np.array(dates, dtype="datetime64[D]"))
    dates = [dates[i] for i in order]
    rows = np.vstack(rows)[order]
    return ThetaMatrix(source_id or path.stem, dates, rows)


def emit_theta(m: ThetaMatrix, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date"] + ["topic_%d" % i for i in range(m.n_topics)])
        for date, row in zip(m.dates, m.rows):
            writer.writerow([str(as_date(date))] + [repr(float(v)) for v in row])


def ingest_events(path) -> list:
    """Read a ``name,date`` event catalog; empty files warn and return []."""
    path = Path(path)
    events = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            warnings.warn(f"{path} is empty; no events loaded")
            return []
        if [h.strip().lower() for h in header[:2]] != ["name", "date"]:
            raise IngestionError(f"bad header in {path}: expected name,date", line=1)
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) < 2:
                raise IngestionError("expected name,date", line=lineno)
            try:
                date = dt.date.fromisoformat(rec[1].strip())
            except ValueError:
                raise IngestionError(f"bad date {rec[1]!r}", line=lineno) from None
            events.append(EventRecord(rec[0].strip(), date))
    if not events:
        warnings.warn(f"{path} contains a header but no events")
    return events


def bundled_events_path() -> Path:
    """Location of the bundled 1950-1995 event catalog."""
    return Path(resources.files("newsflow").joinpath("data", BUNDLED_EVENTS))


def load_bundled_events() -> list:
    return ingest_events(bundled_events_path())


def emit_events(events, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "date"])
        for e in events:
            writer.writerow([e.name, str(e.date)])


def emit_curve(curve, path) -> None:
    """``offset,value,support`` rows for one curve or flow."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["offset", "value", "support"])
        for off, val, sup in zip(curve.offsets, curve.values, curve.support):
            writer.writerow([int(off), repr(float(val)), int(sup)])


def ingest_series(path) -> tuple:
    """Read ``offset,value[,support]`` rows back as (offsets, values)."""
    offsets, values = [], []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip().lower() for h in header[:2]] != ["offset", "value"]:
            raise IngestionError(f"bad header in {path}: expected offset,value", line=1)
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                offsets.append(int(rec[0]))
                values.append(float(rec[1]))
            except ValueError:
                raise IngestionError("bad offset/value row", line=lineno) from None
    return np.array(offsets), np.array(values)


def emit_distance_matrix(dm, path) -> None:
    ids = ["|".join(i) if isinstance(i, tuple) else str(i) for i in dm.ids]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + ids)
        for label, row in zip(ids, dm.d):
            writer.writerow([label] + [repr(float(v)) for v in row])


def emit_model(model, path) -> None:
    """Cluster model as one structured JSON document."""
    doc = {
        "k": model.k,
        "linkage": model.linkage,
        "silhouette": model.silhouette,
        "labels": [int(v) for v in model.labels],
        "grid": model.grid,
        "merges": [list(m) for m in model.dendrogram.merges],
        "embedding": None
        if model.embedding is None
        else [[float(x), float(y)] for x, y in model.embedding],
        "stress": model.stress,
        "archetypes": None
        if model.archetypes is None
        else [
            {
                "cluster": i + 1,
                "values": [float(v) for v in b.values],
                "objective": b.objective,
                "iterations": b.iterations,
                "converged": b.converged,
            }
            for i, b in enumerate(model.archetypes)
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def emit_deviations(table, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "date", "anchor", "distance"])
        for r in table.rows:
            writer.writerow(
                [r.source_id, str(r.anchor_date), r.anchor_name, repr(r.distance)]
            )


def emit_decades(rows, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["source", "decade", "mean", "ci_low", "ci_high", "n", "degenerate"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.source_id,
                    r.decade,
                    repr(r.mean),
                    repr(r.ci_low),
                    repr(r.ci_high),
                    r.n,
                    int(r.degenerate),
                ]
            )


def emit_matches(matches, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "source", "start", "cost"])
        for q in matches:
            writer.writerow([q.rank, q.source_id, str(q.start), repr(q.cost)])


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: dict, inputs, outputs) -> Path:
    """Record what produced a run directory; reruns of the same manifest
    regenerate byte-identical numeric artifacts."""
    manifest = {
        "tool": "newsflow",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {str(p): sha256_of(p) for p in inputs},
        "outputs": sorted(str(o) for o in outputs),
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def read_config_file(path) -> dict:
    """Load a config JSON; a manifest is accepted and unwrapped."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} is not a JSON object")
    if "config" in doc and "tool" in doc:
        return doc["config"]
    return doc
