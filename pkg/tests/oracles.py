"""Independent brute-force references for the oracle-equivalence tests.

Everything here recomputes from first principles (member-list linkage
distances, all-pairs enumeration, forward path search) and deliberately
avoids the library's own data structures and algorithms, so agreement is
evidence rather than tautology.
"""

from __future__ import annotations

from collections import Counter


# --- clustering -------------------------------------------------------------

def naive_euclidean(vectors) -> list[list[float]]:
    n = len(vectors)
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for a, b in zip(vectors[i], vectors[j]):
                acc += (a - b) ** 2
            d[i][j] = acc**0.5
    return d


def naive_agglomerate(dist: list[list[float]], linkage: str) -> list[tuple[int, int, float, int]]:
    """O(n^3) reference: recompute linkage distances from member lists.

    Same tie-break contract as the implementation: equal distances resolve
    to the lexicographically smallest (min cluster id, max cluster id).
    """
    n = len(dist)
    clusters: list[tuple[int, list[int]]] = [(i, [i]) for i in range(n)]
    merges = []
    next_id = n
    while len(clusters) > 1:
        best = None
        for x in range(len(clusters)):
            for y in range(x + 1, len(clusters)):
                id_x, members_x = clusters[x]
                id_y, members_y = clusters[y]
                pair_ds = [dist[i][j] for i in members_x for j in members_y]
                if linkage == "average":
                    value = sum(pair_ds) / len(pair_ds)
                elif linkage == "complete":
                    value = max(pair_ds)
                elif linkage == "single":
                    value = min(pair_ds)
                else:
                    raise ValueError(linkage)
                key = (value, min(id_x, id_y), max(id_x, id_y))
                if best is None or key < best[0]:
                    best = (key, x, y)
        (value, lo, hi), x, y = best
        merged = clusters[x][1] + clusters[y][1]
        merges.append((lo, hi, value, len(merged)))
        clusters = [c for k, c in enumerate(clusters) if k not in (x, y)]
        clusters.append((next_id, merged))
        next_id += 1
    return merges


def naive_silhouette(dist: list[list[float]], labels: list[int]) -> float:
    n = len(labels)
    k = len(set(labels))
    if k < 2 or k > n - 1:
        return -1.0
    scores = []
    for i in range(n):
        same = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not same:
            scores.append(0.0)
            continue
        a = sum(dist[i][j] for j in same) / len(same)
        b = None
        for c in set(labels):
            if c == labels[i]:
                continue
            others = [j for j in range(n) if labels[j] == c]
            mean = sum(dist[i][j] for j in others) / len(others)
            if b is None or mean < b:
                b = mean
        m = max(a, b)
        scores.append(0.0 if m == 0 else (b - a) / m)
    return sum(scores) / n


def naive_cut_members(merges, leaf_count: int, height: float) -> set[frozenset[int]]:
    """Clusters at a height via repeated member-set merging.

    Relies on merge heights being non-decreasing: once a merge exceeds the
    cut height, no later merge can apply either.
    """
    active: dict[int, frozenset[int]] = {i: frozenset([i]) for i in range(leaf_count)}
    for k, (left, right, h, _size) in enumerate(merges):
        if h <= height:
            active[leaf_count + k] = active.pop(left) | active.pop(right)
    return set(active.values())


def oracle_prune(merges, leaf_count: int, dist: list[list[float]], delta: float):
    """Exhaustive cut-enumeration reference for dendrogram pruning.

    Returns {cluster members -> parent members or None} for every emitted
    cluster, derived purely from naive cuts and the naive silhouette.
    """
    heights = sorted({h for _, _, h, _ in merges}, reverse=True)
    cuts = []
    for h in heights:
        clusters = naive_cut_members(merges, leaf_count, h)
        labels = [0] * leaf_count
        for idx, cluster in enumerate(sorted(clusters, key=lambda fs: sorted(fs))):
            for i in cluster:
                labels[i] = idx
        cuts.append((h, clusters, naive_silhouette(dist, labels)))
    valid = [s for _, clusters, s in cuts if 2 <= len(clusters) <= leaf_count - 1]
    if not valid:
        return {}
    max_sil = max(valid)
    emitted: dict[frozenset, frozenset | None] = {}
    for _, clusters, score in cuts:
        if score <= max_sil - delta:
            continue
        for cluster in sorted(clusters, key=lambda fs: sorted(fs)):
            if len(cluster) < 2 or cluster in emitted:
                continue
            supersets = [e for e in emitted if cluster < e]
            emitted[cluster] = min(supersets, key=len) if supersets else None
    return emitted


# --- pair-counting metrics ----------------------------------------------------

def brute_confusion(out_labels, gt_labels):
    n = len(out_labels)
    tp = tn = fp = fn = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_out = out_labels[i] == out_labels[j]
            same_gt = gt_labels[i] == gt_labels[j]
            if same_out and same_gt:
                tp += 1
            elif not same_out and not same_gt:
                tn += 1
            elif same_out:
                fp += 1
            else:
                fn += 1
    return tp, tn, fp, fn


def brute_rand_index(out_labels, gt_labels) -> float:
    tp, tn, fp, fn = brute_confusion(out_labels, gt_labels)
    return (tp + tn) / (tp + tn + fp + fn)


def brute_purity(tables_by_type: dict[str, set[str]], gt_top: dict[str, str]) -> float:
    scores = []
    for type_id in sorted(tables_by_type):
        tops = [gt_top[t] for t in tables_by_type[type_id] if t in gt_top]
        if not tops:
            continue
        counts = Counter(tops)
        best = max(counts.values())
        scores.append(best / len(tops))
    return sum(scores) / len(scores)


# --- tree consistency ---------------------------------------------------------

def _reaches(children: dict[str, set[str]], start: str, goal: str) -> bool:
    """Forward DFS: does a directed path start -> goal exist?"""
    stack = [start]
    visited = set()
    while stack:
        cur = stack.pop()
        if cur == goal:
            return True
        if cur in visited:
            continue
        visited.add(cur)
        stack.extend(children.get(cur, ()))
    return False


def path_ancestors(nodes, edges, target: str) -> set[str]:
    """Ancestors found by forward path search from every other node."""
    children: dict[str, set[str]] = {}
    for p, c in edges:
        children.setdefault(p, set()).add(c)
    return {a for a in nodes if a != target and _reaches(children, a, target)}


def brute_tcs(
    out_nodes: list[str],
    out_edges: list[tuple[str, str]],
    out_tables: dict[str, set[str]],
    synthetic: dict[str, bool],
    gt_nodes: list[str],
    gt_edges: list[tuple[str, str]],
    most_specific: dict[str, str],
) -> float | None:
    """Recompute TCS with path-search ancestors and explicit majorities."""
    children: dict[str, set[str]] = {}
    for p, c in out_edges:
        children.setdefault(p, set()).add(c)

    def associated(t: str) -> set[str]:
        out = set(out_tables.get(t, set()))
        for d in out_nodes:
            if d != t and _reaches(children, t, d):
                out |= out_tables.get(d, set())
        return out

    matching: dict[str, str] = {}
    for t in out_nodes:
        annotated = [most_specific[x] for x in associated(t) if x in most_specific]
        if annotated:
            counts = Counter(annotated)
            matching[t] = min(counts, key=lambda name: (-counts[name], name))
    scores = []
    for t in sorted(out_nodes):
        if synthetic.get(t, False) or t not in matching:
            continue
        ancestors = [
            a for a in path_ancestors(out_nodes, out_edges, t) if not synthetic.get(a, False)
        ]
        if not ancestors:
            scores.append(1.0)
            continue
        gt_anc = path_ancestors(gt_nodes, gt_edges, matching[t])
        hits = sum(1 for a in ancestors if a in matching and matching[a] in gt_anc)
        scores.append(hits / len(ancestors))
    if not scores:
        return None
    return sum(scores) / len(scores)
