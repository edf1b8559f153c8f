"""Slow, independent reference computations used as test oracles.

None of these share code with the package paths they check.
"""

from __future__ import annotations

import itertools
import math


def brute_force_mst_lengths(points) -> list[float]:
    """Edge lengths of a minimum spanning tree by quadratic-time Prim on Python floats."""
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)

    def d(i, j):
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])))

    in_tree = {0}
    best = {j: (d(0, j), 0) for j in range(1, n)}
    out = []
    while best:
        j = min(best, key=lambda k: (best[k][0], k))
        out.append(best.pop(j)[0])
        in_tree.add(j)
        for k in best:
            dk = d(j, k)
            if dk < best[k][0]:
                best[k] = (dk, j)
    return sorted(out)


def brute_force_rips(points, max_simplex_dim: int = 3):
    """H0 and H1 persistence pairs by reducing the full boundary matrix of the Rips complex.

    Every vertex subset up to ``max_simplex_dim`` is a simplex with value equal
    to its diameter. Simplices are ordered by (value, dimension, vertex
    tuple). Columns are sets over Z/2, reduced left to right, no shortcuts.
    Returns ``(h0, h1)`` as sorted lists of ``(birth, death)`` with zero
    persistence pairs dropped and ``inf`` for essential classes.
    """
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)

    def d(i, j):
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])))

    simplices = []
    for k in range(1, max_simplex_dim + 2):
        for s in itertools.combinations(range(n), k):
            value = max((d(i, j) for i, j in itertools.combinations(s, 2)), default=0.0)
            simplices.append((value, k - 1, s))
    simplices.sort()
    index = {s: i for i, (_, _, s) in enumerate(simplices)}
    columns = []
    for value, dim, s in simplices:
        if dim == 0:
            columns.append(set())
        else:
            columns.append({index[f] for f in itertools.combinations(s, dim)})
    low_owner = {}
    pairs = []
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            if low not in low_owner:
                low_owner[low] = j
                pairs.append((low, j))
                break
            col ^= columns[low_owner[low]]
    paired = {i for p in pairs for i in p}
    diagrams = {0: [], 1: []}
    for i, j in pairs:
        dim = simplices[i][1]
        if dim in diagrams and simplices[j][0] > simplices[i][0]:
            diagrams[dim].append((simplices[i][0], simplices[j][0]))
    for i, (value, dim, s) in enumerate(simplices):
        # top-dimensional simplices have no cofaces here, so skip them
        if i not in paired and dim in diagrams and dim < max_simplex_dim:
            diagrams[dim].append((value, math.inf))
    return sorted(diagrams[0]), sorted(diagrams[1])


def _partial_injections(n, m):
    for k in range(0, min(n, m) + 1):
        for left in itertools.combinations(range(n), k):
            for right in itertools.permutations(range(m), k):
                yield list(zip(left, right))


def brute_force_bottleneck(P, Q) -> float:
    """Minimum over every partial matching of the largest cost it forces."""
    P = [tuple(map(float, p)) for p in P]
    Q = [tuple(map(float, q)) for q in Q]
    best = math.inf
    for matching in _partial_injections(len(P), len(Q)):
        used_p = {i for i, _ in matching}
        used_q = {j for _, j in matching}
        cost = 0.0
        for i, j in matching:
            cost = max(cost, abs(P[i][0] - Q[j][0]), abs(P[i][1] - Q[j][1]))
        for k, (b, dd) in enumerate(P):
            if k not in used_p:
                cost = max(cost, (dd - b) / 2)
        for k, (b, dd) in enumerate(Q):
            if k not in used_q:
                cost = max(cost, (dd - b) / 2)
        best = min(best, cost)
    return best


def components_at(points, threshold: float) -> list[set[int]]:
    """Connected components of the graph joining points closer than ``threshold``."""
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        comp, stack = set(), [s]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(
                u for u in range(n)
                if u not in comp and math.dist(pts[u], pts[v]) < threshold
            )
        seen |= comp
        comps.append(comp)
    return comps
