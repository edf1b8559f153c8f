"""Hierarchical density-based clustering (HDBSCAN) for small planar point sets.

Pipeline: core distances, mutual reachability graph, its minimum spanning
tree (Prim, dense), single-linkage merge tree, condensed tree, and
excess-of-mass cluster selection. Ties are broken by point index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..unionfind import UnionFind


@dataclass
class HdbscanResult:
    labels: np.ndarray            # cluster id per point, -1 for noise
    clusters: list[np.ndarray]    # point indices per selected cluster
    mst: np.ndarray               # (n-1, 3) rows of (i, j, mutual reachability distance)
    stability: dict[int, float]

    @property
    def n_noise(self) -> int:
        return int((self.labels < 0).sum())


def core_distances(dist: np.ndarray, k: int) -> np.ndarray:
    """Distance to the k-th nearest neighbour, counting the point itself as the first."""
    return np.partition(dist, k - 1, axis=1)[:, k - 1]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    return np.maximum(dist, np.maximum(core[:, None], core[None, :]))


def prim_mst(weights: np.ndarray) -> np.ndarray:
    """Minimum spanning tree of a complete graph given as a dense symmetric matrix."""
    n = len(weights)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = weights[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    edges = np.empty((n - 1, 3))
    for step in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))
        edges[step] = (parent[v], v, best[v])
        in_tree[v] = True
        closer = weights[v] < best
        best = np.where(closer, weights[v], best)
        parent = np.where(closer, v, parent)
    return edges


def single_linkage(mst: np.ndarray, n: int) -> np.ndarray:
    """Merge tree as rows ``(left, right, distance, size)``; node ``n + r`` is row ``r``."""
    order = np.lexsort((np.minimum(mst[:, 0], mst[:, 1]), mst[:, 2]))
    uf = UnionFind(2 * n - 1)
    node_of = list(range(n))  # union-find root -> current tree node
    size = [1] * (2 * n - 1)
    tree = np.empty((n - 1, 4))
    for r, e in enumerate(order):
        a, b, d = int(mst[e, 0]), int(mst[e, 1]), mst[e, 2]
        ra, rb = uf.find(a), uf.find(b)
        na, nb = node_of[ra], node_of[rb]
        new = n + r
        size[new] = size[na] + size[nb]
        tree[r] = (min(na, nb), max(na, nb), d, size[new])
        uf.union(ra, rb)
        node_of[uf.find(ra)] = new
    return tree


def _leaves(tree: np.ndarray, n: int, node: int) -> list[int]:
    out, stack = [], [node]
    while stack:
        x = stack.pop()
        if x < n:
            out.append(x)
        else:
            l, r = tree[x - n, :2]
            stack.extend((int(r), int(l)))
    return out


def condense_tree(tree: np.ndarray, n: int, min_cluster_size: int, floor: float):
    """Condensed tree as a list of ``(parent, child, lambda, size)``.

    Clusters are numbered from ``n`` (the root) upward; children with ids
    below ``n`` are points falling out of their cluster.
    """
    root = 2 * n - 2
    label = {root: n}
    next_label = n + 1
    rows = []
    stack = [root]
    while stack:
        node = stack.pop()
        l, r, d = int(tree[node - n, 0]), int(tree[node - n, 1]), tree[node - n, 2]
        lam = 1.0 / max(d, floor)
        size_of = lambda x: 1 if x < n else int(tree[x - n, 3])  # noqa: E731
        big = [c for c in (l, r) if size_of(c) >= min_cluster_size]
        parent = label[node]
        if len(big) == 2:
            for c in (l, r):
                label[c] = next_label
                rows.append((parent, next_label, lam, size_of(c)))
                next_label += 1
        for c in (l, r):
            if c in big and len(big) == 1:
                label[c] = parent
            if c not in big:
                rows.extend((parent, p, lam, 1) for p in _leaves(tree, n, c))
        # visit children that remain clusters, left before right
        stack.extend(c for c in (r, l) if c in big and c >= n)
    return rows


def _stabilities(rows, n):
    birth = {n: 0.0}
    for parent, child, lam, size in rows:
        if child >= n:
            birth[child] = lam
    stab = {c: 0.0 for c in birth}
    for parent, child, lam, size in rows:
        stab[parent] += (lam - birth[parent]) * size
    return stab


def _select_eom(rows, n, stability):
    children = {}
    for parent, child, lam, size in rows:
        if child >= n:
            children.setdefault(parent, []).append(child)
    selected = {c: True for c in stability}
    selected[n] = False
    stab = dict(stability)

    def descendants(c):
        out, stack = [], list(children.get(c, []))
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(children.get(x, []))
        return out

    for c in sorted(stability, reverse=True):
        if c == n:
            continue
        sub = sum(stab[k] for k in children.get(c, []))
        if sub > stab[c]:
            selected[c] = False
            stab[c] = sub
        else:
            for k in descendants(c):
                selected[k] = False
    return [c for c in sorted(selected) if selected[c]]


def hdbscan_fit(points, min_cluster_size: int = 5) -> HdbscanResult:
    """Cluster points by HDBSCAN; points in no selected cluster are noise (label -1)."""
    X = np.asarray(points, dtype=np.float64)
    X = X.reshape(len(X), -1)
    n = len(X)
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be at least 2")
    if n < min_cluster_size:
        raise ValueError(f"{n} points is fewer than min_cluster_size={min_cluster_size}")
    if n < 2:
        raise ValueError("need at least 2 points")
    dist = cdist(X, X)
    core = core_distances(dist, min_cluster_size)
    mr = mutual_reachability(dist, core)
    mst = prim_mst(mr)
    tree = single_linkage(mst, n)
    top = float(mst[:, 2].max()) if len(mst) else 1.0
    # zero distances would give infinite lambdas
    floor = 1e-12 * top if top > 0 else 1e-300
    rows = condense_tree(tree, n, min_cluster_size, floor)
    stability = _stabilities(rows, n)
    chosen = _select_eom(rows, n, stability)

    parent_of = {child: parent for parent, child, _, _ in rows if child >= n}

    def owner(c):
        while c not in chosen_set and c in parent_of:
            c = parent_of[c]
        return c if c in chosen_set else None

    chosen_set = set(chosen)
    labels = np.full(n, -1, dtype=np.int64)
    cluster_id = {c: k for k, c in enumerate(chosen)}
    for parent, child, _, _ in rows:
        if child < n:
            o = owner(parent)
            if o is not None:
                labels[child] = cluster_id[o]
    clusters = [np.flatnonzero(labels == k) for k in range(len(chosen))]
    return HdbscanResult(labels, clusters, mst, {c: stability[c] for c in chosen})
