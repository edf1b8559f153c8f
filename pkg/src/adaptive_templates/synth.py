"""Synthetic manifold samplers and Vietoris-Rips persistence in dimensions 0 and 1."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from ._reduction import reduce_triangles
from .diagrams import PersistenceDiagram
from .unionfind import UnionFind


class ManifoldKind(str, Enum):
    ANNULUS = "annulus"
    THREE_CLUSTERS = "three_clusters"
    CLUSTERS_OF_CLUSTERS = "clusters_of_clusters"
    CUBE = "cube"
    TORUS = "torus"
    SPHERE = "sphere"


MANIFOLDS = tuple(k.value for k in ManifoldKind)

CLUSTER_STD = 0.05
THREE_CLUSTER_MEANS = np.array([(0.0, 0.0), (0.0, 2.0), (2.0, 0.0)])
# (3, 5.5) replaces a "(3, 55)" typo in the published list of means
NINE_CLUSTER_MEANS = np.array([
    (0.0, 0.0), (0.0, 1.5), (1.5, 0.0),
    (0.0, 4.0), (1.0, 3.0), (1.0, 5.0),
    (3.0, 4.0), (3.0, 5.5), (4.5, 4.0),
])
ANNULUS_RADII = (1.0, 2.0)
TORUS_TUBE_CENTER = 2.0
TORUS_TUBE_RADIUS = 1.0
SPHERE_NOISE = 0.05


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    seed: int
    kind: str | None = None

    def __post_init__(self):
        self.points.setflags(write=False)

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _gaussian_mixture(rng, n, means):
    which = rng.integers(0, len(means), size=n)
    return means[which] + rng.normal(scale=CLUSTER_STD, size=(n, 2))


def sample_manifold(kind, n: int, seed: int) -> PointCloud:
    """Draw ``n`` points from one of the six benchmark manifolds; pure in ``(kind, n, seed)``."""
    kind = ManifoldKind(kind)
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    if kind is ManifoldKind.ANNULUS:
        r_in, r_out = ANNULUS_RADII
        # area-uniform radius
        r = np.sqrt(rng.uniform(r_in**2, r_out**2, size=n))
        theta = rng.uniform(0.0, 2 * np.pi, size=n)
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        # keep rounding from pushing a radius outside [r_in, r_out]
        norm = np.hypot(pts[:, 0], pts[:, 1])
        pts *= (np.clip(norm, r_in, r_out) / norm)[:, None]
    elif kind is ManifoldKind.THREE_CLUSTERS:
        pts = _gaussian_mixture(rng, n, THREE_CLUSTER_MEANS)
    elif kind is ManifoldKind.CLUSTERS_OF_CLUSTERS:
        pts = _gaussian_mixture(rng, n, NINE_CLUSTER_MEANS)
    elif kind is ManifoldKind.CUBE:
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
    elif kind is ManifoldKind.TORUS:
        theta = rng.uniform(0.0, 2 * np.pi, size=n)
        phi = rng.uniform(0.0, 2 * np.pi, size=n)
        ring = TORUS_TUBE_CENTER + TORUS_TUBE_RADIUS * np.cos(phi)
        pts = np.column_stack([ring * np.cos(theta), ring * np.sin(theta), TORUS_TUBE_RADIUS * np.sin(phi)])
    else:
        v = rng.normal(size=(n, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        radial = 1.0 + rng.uniform(-SPHERE_NOISE, SPHERE_NOISE, size=n)
        pts = v * radial[:, None]
    return PointCloud(np.ascontiguousarray(pts, dtype=np.float64), int(seed), kind.value)


def enclosing_radius(dist: np.ndarray) -> float:
    """Smallest radius at which some vertex is joined to all others."""
    return float(dist.max(axis=1).min())


def _filtered_edges(dist, max_radius):
    n = len(dist)
    iu, ju = np.triu_indices(n, 1)
    length = dist[iu, ju]
    keep = length <= max_radius
    iu, ju, length = iu[keep], ju[keep], length[keep]
    order = np.lexsort((ju, iu, length))
    return iu[order], ju[order], length[order]


def _filtered_triangles(rank):
    n = len(rank)
    Is, Js, Ks = [], [], []
    for i in range(n - 2):
        js, ks = np.triu_indices(n - i - 1, 1)
        js += i + 1
        ks += i + 1
        ok = (rank[i, js] >= 0) & (rank[i, ks] >= 0) & (rank[js, ks] >= 0)
        Is.append(np.full(int(ok.sum()), i))
        Js.append(js[ok])
        Ks.append(ks[ok])
    if not Is:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty
    return np.concatenate(Is), np.concatenate(Js), np.concatenate(Ks)


def rips_persistence(X, max_dim: int = 1, max_radius: float | None = None):
    """Vietoris-Rips persistence diagrams ``(H0, H1)`` of a point cloud.

    H0 comes from Kruskal's algorithm (one point ``(0, d)`` per MST edge plus
    one infinite bar per connected component). H1 comes from reducing the
    triangle boundary matrix with simplices ordered by filtration value and
    then lexicographically by vertices. Pivot edges of that reduction are
    positive, so they are cleared from the edge pass. Zero-persistence pairs
    are dropped. With ``max_dim=0`` the H1 diagram is returned empty.
    """
    pts = np.asarray(X.points if isinstance(X, PointCloud) else X, dtype=np.float64)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("need at least 2 points")
    if max_dim not in (0, 1):
        raise ValueError("max_dim must be 0 or 1")
    n = len(pts)
    dist = squareform(pdist(pts))
    if max_radius is None:
        max_radius = enclosing_radius(dist)
    elif max_radius <= 0:
        raise ValueError("max_radius must be positive")

    iu, ju, length = _filtered_edges(dist, max_radius)
    n_edges = len(length)
    rank = np.full((n, n), -1, dtype=np.int64)
    rank[iu, ju] = np.arange(n_edges)
    rank[ju, iu] = rank[iu, ju]

    graph = coo_matrix((np.ones(n_edges), (iu, ju)), shape=(n, n))
    n_components = connected_components(graph, directed=False)[0]
    n_positive = n_edges - (n - n_components)

    cleared = np.zeros(n_edges, dtype=bool)
    h1 = PersistenceDiagram()
    if max_dim >= 1 and n_positive > 0:
        I, J, K = _filtered_triangles(rank)
        e1, e2, e3 = rank[I, J], rank[I, K], rank[J, K]
        diam = length[np.maximum(np.maximum(e1, e2), e3)]
        order = np.lexsort((K, J, I, diam))
        pair_edge, pair_tri = reduce_triangles(e1[order], e2[order], e3[order], n_edges, n_positive)
        cleared[pair_edge] = True
        births = length[pair_edge]
        deaths = diam[order][pair_tri]
        keep = deaths > births
        h1_b, h1_d = list(births[keep]), list(deaths[keep])

    uf = UnionFind(n)
    h0_deaths = []
    negative = np.zeros(n_edges, dtype=bool)
    merges = 0
    for e in range(n_edges):
        if merges == n - n_components:
            break
        if cleared[e]:
            continue
        if uf.union(int(iu[e]), int(ju[e])):
            negative[e] = True
            merges += 1
            if length[e] > 0:
                h0_deaths.append(float(length[e]))
    h0_b = [0.0] * len(h0_deaths) + [0.0] * n_components
    h0 = PersistenceDiagram(h0_b, h0_deaths + [np.inf] * n_components)

    if max_dim >= 1 and n_positive > 0:
        # positive edges never killed by a triangle below max_radius stay essential
        essential = ~negative & ~cleared
        h1_b += list(length[essential])
        h1_d += [np.inf] * int(essential.sum())
        h1 = PersistenceDiagram(h1_b, h1_d)
    return h0, h1
