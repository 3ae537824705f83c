"""Agglomerative clustering, dendrogram cuts, and silhouette-driven k selection.

The merge loop is written here rather than delegated to a library because
the pipeline needs (a) arbitrary precomputed distance matrices (Euclidean
over embeddings, Jaccard over attribute sets), (b) cuts at arbitrary
heights with exact `<=` semantics, and (c) a documented deterministic
tie-break so reruns are byte-identical: among equal-distance pairs, the
pair with the lexicographically smallest (min cluster id, max cluster id)
merges first. Cluster ids are scipy-style: leaves 0..n-1, merge k creates
id n+k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NoValidKError

logger = logging.getLogger(__name__)

LINKAGES = ("average", "complete", "single")

# sentinel for cuts where the silhouette is undefined (k < 2 or k > n-1)
UNDEFINED_SILHOUETTE = -1.0


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.d, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.array_equal(arr, arr.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(arr) != 0):
            raise ValueError("distance matrix diagonal must be zero")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("distances must be finite and non-negative")
        object.__setattr__(self, "d", arr)

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    merges: tuple[Merge, ...]
    leaf_count: int

    def __post_init__(self):
        if len(self.merges) != self.leaf_count - 1:
            raise ValueError("a dendrogram over n leaves has exactly n-1 merges")

    @property
    def heights(self) -> list[float]:
        return [m.height for m in self.merges]


@dataclass(frozen=True)
class FlatClustering:
    labels: tuple[int, ...]
    k: int

    def groups(self) -> list[list[int]]:
        """Item indices per cluster, in label order."""
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, lab in enumerate(self.labels):
            out[lab].append(i)
        return out


def euclidean_matrix(vectors: list[np.ndarray] | np.ndarray) -> DistanceMatrix:
    """Pairwise Euclidean distances, computed from explicit differences.

    Differences (not the Gram-matrix shortcut) keep near-duplicate vectors
    at distances accurate to ~1e-15, which the clustering tie-breaks and
    the zero-height cut both rely on.
    """
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2:
        raise DimensionMismatchError("vectors must share one dimension")
    n = mat.shape[0]
    d = np.zeros((n, n))
    for i in range(n - 1):
        diff = mat[i + 1 :] - mat[i]
        d[i, i + 1 :] = np.sqrt(np.sum(diff * diff, axis=1))
    d += d.T
    return DistanceMatrix(d)


def agglomerate(dm: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Build the merge tree under average/complete/single linkage.

    Inter-cluster distances follow the Lance-Williams updates (UPGMA for
    average), so the result matches a naive recomputation from cluster
    members up to floating-point roundoff. Per-row minima are cached and
    only rows whose cached argmin pointed at a merged slot are rescanned,
    which keeps desk-scale inputs fast without changing the merge order:
    the global minimum and the full tie set are recovered exactly.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    n = dm.n
    if n < 2:
        raise ValueError("need at least 2 items to agglomerate")
    dist = dm.d.copy()
    np.fill_diagonal(dist, np.inf)
    active = np.ones(n, dtype=bool)
    row_min = dist.min(axis=1)
    row_arg = dist.argmin(axis=1)
    cid = list(range(n))
    sizes = [1] * n
    merges: list[Merge] = []
    next_id = n
    for _ in range(n - 1):
        current_min = row_min[active].min()
        # every tied pair has both endpoints' row minimum at current_min
        best_key: tuple[int, int] | None = None
        best_slots = (-1, -1)
        for r in np.flatnonzero(active & (row_min == current_min)):
            for c in np.flatnonzero(dist[r] == current_min):
                a, b = cid[r], cid[c]
                key = (a, b) if a < b else (b, a)
                if best_key is None or key < best_key:
                    best_key, best_slots = key, (int(r), int(c))
        assert best_key is not None
        i, j = best_slots
        si_size, sj_size = sizes[i], sizes[j]
        merges.append(Merge(best_key[0], best_key[1], float(current_min), si_size + sj_size))
        row_i, row_j = dist[i], dist[j]
        if linkage == "average":
            new_row = (si_size * row_i + sj_size * row_j) / (si_size + sj_size)
        elif linkage == "complete":
            new_row = np.maximum(row_i, row_j)
        else:
            new_row = np.minimum(row_i, row_j)
        new_row[i] = np.inf
        new_row[j] = np.inf
        dist[i, :] = new_row
        dist[:, i] = new_row
        dist[j, :] = np.inf
        dist[:, j] = np.inf
        active[j] = False
        row_min[j] = np.inf
        cid[i] = next_id
        sizes[i] = si_size + sj_size
        next_id += 1
        if not active.any() or next_id - n == n - 1:
            break
        # rows whose cached minimum lived in a merged slot need a rescan;
        # everyone else only sees slot i change, and only downward moves matter
        stale = active & ((row_arg == i) | (row_arg == j))
        stale[i] = True
        stale_rows = np.flatnonzero(stale)
        if stale_rows.size:
            row_min[stale_rows] = dist[stale_rows].min(axis=1)
            row_arg[stale_rows] = dist[stale_rows].argmin(axis=1)
        fresh = active & ~stale
        improved = fresh & (dist[:, i] < row_min)
        row_min[improved] = dist[improved, i]
        row_arg[improved] = i
    heights = [m.height for m in merges]
    for prev, cur in zip(heights, heights[1:]):
        if cur < prev - 1e-9 * max(1.0, abs(prev)):
            logger.warning("non-monotone merge heights: %.17g after %.17g", cur, prev)
    return Dendrogram(tuple(merges), n)


def _cut_applied(den: Dendrogram, applied: int) -> FlatClustering:
    """Clustering obtained by applying the first ``applied`` merges."""
    n = den.leaf_count
    uf = list(range(n))

    def find(x: int) -> int:
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    rep: dict[int, int] = {i: i for i in range(n)}
    for k, merge in enumerate(den.merges):
        rep[n + k] = rep[merge.left]
        if k < applied:
            uf[find(rep[merge.right])] = find(rep[merge.left])
    labels = []
    canon: dict[int, int] = {}
    for i in range(n):
        root = find(i)
        if root not in canon:
            canon[root] = len(canon)
        labels.append(canon[root])
    return FlatClustering(tuple(labels), len(canon))


def cut(den: Dendrogram, height: float) -> FlatClustering:
    """Sever all merges with height strictly greater than ``height``."""
    if height < 0:
        raise ValueError("cut height must be >= 0")
    applied = sum(1 for m in den.merges if m.height <= height)
    return _cut_applied(den, applied)


def silhouette(dm: DistanceMatrix, fc: FlatClustering) -> float:
    """Mean silhouette coefficient; -1 sentinel outside 2 <= k <= n-1.

    Items in singleton clusters contribute 0, and so do items whose intra
    and nearest-other mean distances are both 0.
    """
    n = dm.n
    k = fc.k
    if k < 2 or k > n - 1:
        return UNDEFINED_SILHOUETTE
    labels = np.asarray(fc.labels)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.zeros((n, k))
    for c in range(k):
        sums[:, c] = dm.d[:, labels == c].sum(axis=1)
    own = counts[labels]
    a = sums[np.arange(n), labels] / np.maximum(own - 1, 1)
    mean_to = sums / counts[np.newaxis, :]
    mean_to[np.arange(n), labels] = np.inf
    b = mean_to.min(axis=1)
    widest = np.maximum(a, b)
    with np.errstate(invalid="ignore"):
        scores = np.where(widest > 0, (b - a) / widest, 0.0)
    scores[own == 1] = 0.0
    return float(scores.mean())


def distinct_heights_desc(den: Dendrogram) -> list[float]:
    """Distinct merge heights, highest first (the finite set of cut levels)."""
    return sorted(set(den.heights), reverse=True)


def select_k(
    dm: DistanceMatrix, den: Dendrogram, k_range: tuple[int, int]
) -> tuple[int, FlatClustering]:
    """Silhouette-maximizing cluster count over realizable dendrogram cuts.

    Counts in the range that no cut produces are skipped; ties go to the
    smallest k.
    """
    lo, hi = k_range
    n = den.leaf_count
    if not (2 <= lo <= hi <= n - 1):
        raise ValueError(f"invalid k range ({lo}, {hi}) for n={n}")
    heights = den.heights
    best: tuple[float, int, FlatClustering] | None = None
    for k in range(lo, hi + 1):
        applied = n - k
        if heights[applied - 1] == heights[applied]:
            continue
        fc = _cut_applied(den, applied)
        score = silhouette(dm, fc)
        if best is None or score > best[0]:
            best = (score, k, fc)
    if best is None:
        raise NoValidKError(f"no k in [{lo}, {hi}] is realizable by a cut")
    return best[1], best[2]
