"""Exact bottleneck distance between persistence diagrams."""

from __future__ import annotations

import sys
from typing import Sequence

import numpy as np

from .diagrams import Frame, PersistenceDiagram, to_frame


def _expanded_finite(D: PersistenceDiagram) -> np.ndarray:
    D = to_frame(D, Frame.BIRTH_DEATH).finite()
    return D.expanded().reshape(-1, 2)


def _points(D) -> np.ndarray:
    if isinstance(D, PersistenceDiagram):
        return to_frame(D, Frame.BIRTH_DEATH).expanded().reshape(-1, 2)
    return np.asarray(D, dtype=np.float64).reshape(-1, 2)


def is_delta_matching(matching: Sequence[tuple[int, int]], D1, D2, delta: float) -> bool:
    """Check the two delta-matching conditions for a partial matching.

    Indices refer to the multiplicity-expanded point lists of ``D1`` and
    ``D2`` (birth-death coordinates). Matched pairs must be within ``delta``
    in the sup norm; every unmatched point must have persistence at most
    ``2 * delta``.
    """
    P, Q = _points(D1), _points(D2)
    left, right = set(), set()
    for i, j in matching:
        if not (0 <= i < len(P)) or not (0 <= j < len(Q)):
            raise IndexError(f"pair ({i}, {j}) out of range for sizes {len(P)}, {len(Q)}")
        if i in left or j in right:
            raise ValueError(f"index reused in pair ({i}, {j})")
        left.add(i)
        right.add(j)
        if np.max(np.abs(P[i] - Q[j])) > delta:
            return False
    for pts, used in ((P, left), (Q, right)):
        for k, (b, d) in enumerate(pts):
            if k not in used and d - b > 2 * delta:
                return False
    return True


def _max_matching(adj: list[list[int]], n_right: int) -> int:
    """Maximum bipartite matching by repeated augmenting paths (Kuhn)."""
    match_right = [-1] * n_right

    def augment(u, seen):
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] < 0 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in range(len(adj)):
        if augment(u, [False] * n_right):
            size += 1
    return size


def _feasible(P: np.ndarray, Q: np.ndarray, cross: np.ndarray, half_p, half_q, delta: float) -> bool:
    # left = P plus diagonal copies of Q; right = Q plus diagonal copies of P
    n, m = len(P), len(Q)
    adj: list[list[int]] = []
    for i in range(n):
        row = [j for j in range(m) if cross[i, j] <= delta]
        if half_p[i] <= delta:
            row.append(m + i)
        adj.append(row)
    for j in range(m):
        row = [j] if half_q[j] <= delta else []
        row.extend(m + i for i in range(n))
        adj.append(row)
    return _max_matching(adj, m + n) == n + m


def bottleneck_distance(D1: PersistenceDiagram, D2: PersistenceDiagram) -> float:
    """Bottleneck distance of the finite parts of two diagrams.

    Candidate values are all pairwise sup-norm distances and all
    half-persistences; the smallest feasible one is found by binary search,
    with feasibility decided by a perfect-matching test.
    """
    if D1.n_infinite != D2.n_infinite:
        raise ValueError(
            f"diagrams have {D1.n_infinite} and {D2.n_infinite} infinite points; distance is infinite"
        )
    P, Q = _expanded_finite(D1), _expanded_finite(D2)
    if len(P) == 0 and len(Q) == 0:
        return 0.0
    if sys.getrecursionlimit() < 4 * (len(P) + len(Q)) + 100:
        sys.setrecursionlimit(4 * (len(P) + len(Q)) + 100)
    cross = np.max(np.abs(P[:, None, :] - Q[None, :, :]), axis=2) if len(P) and len(Q) else np.empty((len(P), len(Q)))
    half_p = (P[:, 1] - P[:, 0]) / 2
    half_q = (Q[:, 1] - Q[:, 0]) / 2
    candidates = np.unique(np.concatenate([cross.ravel(), half_p, half_q]))
    lo, hi = 0, len(candidates) - 1
    # the largest candidate is always feasible
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(P, Q, cross, half_p, half_q, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])
