"""Grouping event flows into archetypes.

Pipeline: pairwise DTW distances -> agglomerative dendrogram -> flat cut
chosen by silhouette grid search -> one DBA archetype per cluster, plus a
classical-MDS 2-D embedding of the distance matrix for visual checks.

Clustering runs on the DTW matrix directly by default.  ``space=
"embedding"`` instead clusters euclidean distances measured in the 2-D
embedding, which replicates a projection-then-cluster pipeline; the two
modes agree on well-separated data and are compared in the test suite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .alignment import Barycenter, dba
from .errors import DomainError, NewsflowError

LINKAGES = ("average", "single", "complete")


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric non-negative distances between labelled flows."""

    ids: tuple
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        n = len(self.ids)
        if d.shape != (n, n):
            raise DomainError(f"matrix shape {d.shape} does not fit {n} ids")
        if not np.all(np.isfinite(d)):
            raise DomainError("distance matrix has non-finite entries")
        if np.any(np.abs(d - d.T) > 1e-9):
            raise DomainError("distance matrix is not symmetric within 1e-9")
        if np.any(np.diag(d) != 0):
            raise DomainError("distance matrix diagonal must be exactly zero")
        if np.any(d < 0):
            raise DomainError("distances must be non-negative")
        d = 0.5 * (d + d.T)
        d.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "d", d)

    def __len__(self):
        return len(self.ids)


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge tree.

    ``merges`` holds ``n_leaves - 1`` tuples ``(a, b, height, size)`` in
    merge order; leaf ids are ``0..n-1`` and merge ``i`` creates cluster id
    ``n + i`` (the scipy linkage convention).
    """

    n_leaves: int
    merges: tuple

    def __post_init__(self):
        if len(self.merges) != self.n_leaves - 1:
            raise DomainError(
                f"{self.n_leaves} leaves need {self.n_leaves - 1} merges, "
                f"got {len(self.merges)}"
            )
        object.__setattr__(self, "merges", tuple(tuple(m) for m in self.merges))

    @property
    def heights(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges])

    def to_linkage(self) -> np.ndarray:
        """Merges as a scipy-compatible (n-1, 4) linkage array (for plotting)."""
        return np.array([[a, b, h, s] for a, b, h, s in self.merges], dtype=np.float64)


@dataclass
class ClusterModel:
    """A chosen flat clustering with its audit trail."""

    labels: np.ndarray
    k: int
    linkage: str
    silhouette: float
    dendrogram: Dendrogram
    grid: list = field(default_factory=list)
    archetypes: list | None = None
    embedding: np.ndarray | None = None
    stress: float | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        counts = np.bincount(labels, minlength=self.k + 1)
        if counts[0] != 0 or len(counts) != self.k + 1 or np.any(counts[1:] == 0):
            raise DomainError(f"labels must cover 1..{self.k} with no empty cluster")
        if not -1.0 <= self.silhouette <= 1.0:
            raise DomainError("silhouette out of [-1, 1]")
        self.labels = labels


@dataclass(frozen=True)
class Embedding:
    """2-D classical-MDS coordinates with the residual stress."""

    coords: np.ndarray
    stress: float
    degenerate: bool = False


def pairwise_dtw(flows, band: int | None = None) -> DistanceMatrix:
    """DTW cost between every unordered pair of equal-length flows."""
    flows = list(flows)
    if len(flows) < 2:
        raise DomainError("need at least 2 flows")
    lengths = {len(f.values) for f in flows}
    if len(lengths) != 1:
        raise DomainError(f"flows differ in length: {sorted(lengths)}")
    x = np.vstack([f.values for f in flows])
    d = _backend.pairwise_dtw(x, -1 if band is None else int(band))
    ids = tuple((f.event.name, f.source_id) for f in flows)
    return DistanceMatrix(ids, d)


def _agglomerate(d: np.ndarray, linkage: str) -> list:
    if linkage not in LINKAGES:
        raise DomainError(f"unknown linkage {linkage!r}; options: {LINKAGES}")
    n = d.shape[0]
    total = 2 * n - 1
    big = np.full((total, total), np.inf)
    big[:n, :n] = d
    np.fill_diagonal(big, np.inf)
    size = np.zeros(total)
    size[:n] = 1
    active = np.zeros(total, dtype=bool)
    active[:n] = True
    merges = []
    for step in range(n - 1):
        idx = np.flatnonzero(active)
        sub = big[np.ix_(idx, idx)]
        # argmin scans row-major, so equal minima resolve to the smallest
        # (a, b) pair of cluster ids: the required lexicographic tie-break.
        i, j = divmod(int(np.argmin(sub)), idx.size)
        a, b = int(idx[i]), int(idx[j])
        height = float(sub[i, j])
        new = n + step
        others = idx[(idx != a) & (idx != b)]
        if linkage == "average":
            dnew = (size[a] * big[a, others] + size[b] * big[b, others]) / (
                size[a] + size[b]
            )
        elif linkage == "single":
            dnew = np.minimum(big[a, others], big[b, others])
        else:
            dnew = np.maximum(big[a, others], big[b, others])
        big[new, others] = dnew
        big[others, new] = dnew
        size[new] = size[a] + size[b]
        active[a] = active[b] = False
        active[new] = True
        merges.append((a, b, height, int(size[new])))
    return merges


def upgma(dm: DistanceMatrix) -> Dendrogram:
    """Average-linkage agglomeration of a distance matrix.

    Repeatedly merges the pair of clusters with minimal mean inter-cluster
    distance (ties to the lexicographically lowest id pair).  Raises if the
    merge heights ever decrease, which cannot happen for average linkage on
    a valid matrix and would indicate corrupted input.
    """
    if len(dm) < 2:
        raise DomainError("need at least 2 items to cluster")
    merges = _agglomerate(dm.d, "average")
    heights = np.array([m[2] for m in merges])
    if np.any(np.diff(heights) < -1e-12):
        raise NewsflowError(
            f"UPGMA merge heights are not monotone: {heights.tolist()}"
        )
    return Dendrogram(len(dm), merges)


def cut(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Flat labels 1..k obtained by undoing the k-1 highest merges.

    Label numbers are assigned by first-seen leaf index, so the leaf with
    the lowest index is always in cluster 1.
    """
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise DomainError(f"k={k} out of range [1, {n}]")
    comp = np.arange(n)
    for step in range(n - k):
        a, b, _, _ = dendrogram.merges[step]
        comp[(comp == a) | (comp == b)] = n + step
    labels = np.zeros(n, dtype=np.int64)
    seen = {}
    for leaf in range(n):
        c = comp[leaf]
        if c not in seen:
            seen[c] = len(seen) + 1
        labels[leaf] = seen[c]
    return labels


def silhouette(dm, labels) -> float:
    """Mean silhouette score of a flat clustering over a distance matrix.

    Per point: (b - a) / max(a, b) with a the mean intra-cluster distance
    (self excluded) and b the smallest mean distance to another cluster.
    Points in singleton clusters contribute 0.
    """
    d = dm.d if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)
    labels = np.asarray(labels)
    n = d.shape[0]
    if labels.shape != (n,):
        raise DomainError("labels do not match the matrix")
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise DomainError("silhouette needs at least 2 clusters")
    masks = {c: labels == c for c in uniq}
    scores = np.zeros(n)
    for i in range(n):
        own = masks[labels[i]]
        n_own = int(own.sum())
        if n_own == 1:
            continue
        a = d[i, own].sum() / (n_own - 1)
        b = min(d[i, masks[c]].mean() for c in uniq if c != labels[i])
        m = max(a, b)
        scores[i] = 0.0 if m == 0 else (b - a) / m
    return float(scores.mean())


def embed_2d(dm: DistanceMatrix) -> Embedding:
    """Classical metric MDS onto 2 dimensions.

    Double-centers the squared distances and keeps the top-2 eigenvectors;
    each axis is flipped so the first point's coordinate is non-negative
    (cascading to the next point when it is zero).  A fully degenerate
    (all-zero) matrix maps every point to the origin and is flagged.
    """
    d = dm.d if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)
    n = d.shape[0]
    if not np.any(d):
        warnings.warn("all distances are zero; embedding collapsed to the origin")
        return Embedding(np.zeros((n, 2)), 0.0, degenerate=True)
    center = np.eye(n) - np.full((n, n), 1.0 / n)
    bmat = -0.5 * center @ (d**2) @ center
    evals, evecs = np.linalg.eigh(bmat)
    order = np.argsort(evals)[::-1][:2]
    lam = np.clip(evals[order], 0.0, None)
    # eigenvalues at numerical-zero scale are noise, not geometry
    lam[lam < lam.max() * 1e-12] = 0.0
    coords = evecs[:, order] * np.sqrt(lam)
    for axis in range(coords.shape[1]):
        col = coords[:, axis]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            coords[:, axis] = -col
    delta = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=-1))
    stress = float(np.sqrt(((d - delta) ** 2).sum() / (d**2).sum()))
    return Embedding(coords, stress)


def archetypes(flows, labels, max_iter: int = 30, tol: float = 1e-6) -> list:
    """One DBA barycenter per cluster, ordered by cluster label."""
    flows = list(flows)
    labels = np.asarray(labels)
    if labels.shape != (len(flows),):
        raise DomainError("labels do not match flows")
    out = []
    for c in range(1, int(labels.max()) + 1):
        members = [flows[i].values for i in np.flatnonzero(labels == c)]
        if not members:
            raise DomainError(f"cluster {c} is empty")
        out.append(dba(members, max_iter=max_iter, tol=tol))
    return out


def select_model(
    dm: DistanceMatrix,
    k_range,
    linkage_options=("average",),
    flows=None,
    space: str = "dtw",
) -> ClusterModel:
    """Silhouette-driven grid search over (k, linkage).

    Evaluates every combination, keeps the full grid for audit, and returns
    the best model; ties go to the smaller k, then to the linkage listed
    first.  When ``flows`` are supplied the per-cluster DBA archetypes are
    attached.
    """
    ks = sorted(set(int(k) for k in k_range))
    n = len(dm)
    if not ks:
        raise DomainError("empty k range")
    if ks[0] < 2 or ks[-1] > n - 1:
        raise DomainError(f"k range {ks} outside [2, {n - 1}]")
    linkage_options = tuple(linkage_options)
    if not linkage_options:
        raise DomainError("no linkage options given")
    if space not in ("dtw", "embedding"):
        raise DomainError(f"unknown clustering space {space!r}")

    emb = embed_2d(dm)
    if space == "embedding":
        coords = emb.coords
        cluster_d = np.sqrt(
            ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=-1)
        )
        np.fill_diagonal(cluster_d, 0.0)
    else:
        cluster_d = dm.d

    grid = []
    candidates = []
    for linkage_idx, linkage in enumerate(linkage_options):
        merges = _agglomerate(cluster_d, linkage)
        dend = Dendrogram(n, merges)
        for k in ks:
            labels = cut(dend, k)
            score = silhouette(cluster_d, labels)
            grid.append({"k": k, "linkage": linkage, "silhouette": score})
            candidates.append((-score, k, linkage_idx, labels, dend))
    candidates.sort(key=lambda c: c[:3])
    neg_score, k, linkage_idx, labels, dend = candidates[0]
    model = ClusterModel(
        labels=labels,
        k=k,
        linkage=linkage_options[linkage_idx],
        silhouette=-neg_score,
        dendrogram=dend,
        grid=grid,
        embedding=emb.coords,
        stress=emb.stress,
    )
    if flows is not None:
        model.archetypes = archetypes(flows, labels)
    return model


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two flat clusterings."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise DomainError("label vectors differ in length")
    n = a.size
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)
    comb = lambda x: x * (x - 1) / 2.0
    sum_cells = comb(contingency).sum()
    sum_rows = comb(contingency.sum(axis=1)).sum()
    sum_cols = comb(contingency.sum(axis=0)).sum()
    expected = sum_rows * sum_cols / comb(n)
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))
