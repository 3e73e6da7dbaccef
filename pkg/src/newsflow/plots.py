"""Vector-graphics artifacts for the main result views.

Plots are batch outputs, not an interactive surface: each helper takes
already-computed objects and writes one standalone SVG.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import Series, rolling_mean


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return Path(path)


def plot_curves(curves, path, smoothing: int | None = 5):
    """Grid of jump-entropy curves, raw plus optional rolling-mean overlay."""
    curves = list(curves)
    n = len(curves)
    cols = min(4, max(1, n))
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 2.6 * rows), squeeze=False)
    for ax in axes.flat[n:]:
        ax.axis("off")
    for ax, curve in zip(axes.flat, curves):
        ax.plot(curve.offsets, curve.values, lw=0.8, alpha=0.6)
        if smoothing and smoothing > 1 and len(curve.offsets) >= smoothing:
            smooth = rolling_mean(Series(curve.values, curve.offsets), smoothing)
            ax.plot(curve.offsets, smooth.values, lw=1.4, color="tab:orange")
        ax.axvline(0, color="grey", lw=0.6, ls=":")
        title = getattr(curve, "focal_date", None) or getattr(curve, "event", None)
        if hasattr(title, "name"):
            title = title.name
        ax.set_title(f"{curve.source_id} {title}", fontsize=8)
    fig.supxlabel("jump offset (days)")
    fig.supylabel("mean JSD (bits)")
    return _finish(fig, path)


def plot_flows(flows, path, by_event: bool = True):
    """Flow signatures grouped per event (thin lines, one color per source)."""
    groups = {}
    for f in flows:
        key = f.event.name if by_event else f.source_id
        groups.setdefault(key, []).append(f)
    n = len(groups)
    cols = min(4, max(1, n))
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 2.6 * rows), squeeze=False)
    for ax in axes.flat[n:]:
        ax.axis("off")
    for ax, (key, members) in zip(axes.flat, sorted(groups.items())):
        for f in members:
            ax.plot(f.offsets, f.values, lw=0.8, alpha=0.7)
        ax.axvline(0, color="grey", lw=0.6, ls=":")
        ax.set_title(key, fontsize=8)
    fig.supxlabel("offset (days)")
    fig.supylabel("z-normalized flow")
    return _finish(fig, path)


def plot_consensus(flows, barycenters, path):
    """Members as thin lines, consensus barycenters bold (one panel per mode)."""
    fig, axes = plt.subplots(
        1, len(barycenters), figsize=(5 * len(barycenters), 3.2), squeeze=False
    )
    for ax, (label, bary) in zip(axes.flat, barycenters.items()):
        for f in flows:
            ax.plot(f.offsets, f.values, lw=0.7, alpha=0.5)
        x = np.linspace(f.offsets[0], f.offsets[-1], len(bary.values))
        ax.plot(x, bary.values, lw=2.2, color="tab:red")
        ax.axvline(0, color="grey", lw=0.6, ls=":")
        ax.set_title(label, fontsize=9)
    return _finish(fig, path)


def plot_model(model, flows, path):
    """Dendrogram on top, per-cluster flows with bold archetypes below."""
    from scipy.cluster.hierarchy import dendrogram as scipy_dendrogram

    k = model.k
    fig = plt.figure(figsize=(3.2 * k, 6))
    top = fig.add_subplot(2, 1, 1)
    scipy_dendrogram(
        model.dendrogram.to_linkage(),
        ax=top,
        no_labels=True,
        color_threshold=None,
        link_color_func=lambda _: "tab:blue",
    )
    top.set_ylabel("merge height")
    for c in range(1, k + 1):
        ax = fig.add_subplot(2, k, k + c)
        members = [f for f, lab in zip(flows, model.labels) if lab == c]
        for f in members:
            ax.plot(f.offsets, f.values, lw=0.6, alpha=0.4)
        if model.archetypes is not None:
            bary = model.archetypes[c - 1]
            x = np.linspace(members[0].offsets[0], members[0].offsets[-1], len(bary.values))
            ax.plot(x, bary.values, lw=2.0, color="black")
        ax.set_title(f"cluster {c} (n={len(members)})", fontsize=8)
    return _finish(fig, path)


def plot_embedding(model, path):
    """2-D MDS scatter colored by cluster label."""
    fig, ax = plt.subplots(figsize=(5, 4.5))
    coords = model.embedding
    scatter = ax.scatter(
        coords[:, 0], coords[:, 1], c=model.labels, cmap="tab10", s=14
    )
    ax.legend(*scatter.legend_elements(), title="cluster", fontsize=8)
    ax.set_title(f"MDS embedding (stress {model.stress:.3f})", fontsize=9)
    return _finish(fig, path)


def plot_decades(rows, path):
    """Mean deviation per decade and source with 95% CI whiskers."""
    sources = sorted({r.source_id for r in rows})
    decades = sorted({r.decade for r in rows})
    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(decades)), 4))
    width = 0.8 / max(len(sources), 1)
    for i, src in enumerate(sources):
        xs, ys, errs = [], [], []
        for j, dec in enumerate(decades):
            match = [r for r in rows if r.source_id == src and r.decade == dec]
            if not match:
                continue
            r = match[0]
            xs.append(j + i * width)
            ys.append(r.mean)
            errs.append((r.mean - r.ci_low, r.ci_high - r.mean))
        if xs:
            ax.bar(xs, ys, width=width, label=src)
            ax.errorbar(
                xs, ys, yerr=np.array(errs).T, fmt="none", ecolor="black", lw=0.8
            )
    ax.set_xticks(np.arange(len(decades)) + 0.4)
    ax.set_xticklabels([f"{d}s" for d in decades])
    ax.set_ylabel("distance to consensus")
    ax.legend(fontsize=7, ncol=2)
    return _finish(fig, path)


def plot_event_heatmap(table, path):
    """Sources x events heatmap of distance to consensus; gaps stay white."""
    sources = sorted({r.source_id for r in table.rows})
    anchors = sorted({(r.anchor_date, r.anchor_name) for r in table.rows})
    grid = np.full((len(sources), len(anchors)), np.nan)
    src_idx = {s: i for i, s in enumerate(sources)}
    anc_idx = {a: j for j, a in enumerate(anchors)}
    for r in table.rows:
        grid[src_idx[r.source_id], anc_idx[(r.anchor_date, r.anchor_name)]] = r.distance
    fig, ax = plt.subplots(figsize=(max(6, 0.3 * len(anchors)), 0.5 * len(sources) + 2))
    im = ax.imshow(grid, aspect="auto", cmap="viridis")
    ax.set_yticks(range(len(sources)))
    ax.set_yticklabels(sources, fontsize=7)
    ax.set_xticks(range(len(anchors)))
    ax.set_xticklabels([a[1] for a in anchors], rotation=90, fontsize=6)
    fig.colorbar(im, ax=ax, label="distance to consensus")
    return _finish(fig, path)
