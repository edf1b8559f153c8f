"""Entropy-driven cover search producing ellipse templates.

The search is a quadtree over the bounding rectangle of all weighted points.
Each rectangle is split into four at the weighted centroid of its points.
A rectangle is emitted as soon as it is label-pure enough (low entropy) and
heavy enough, recursed into while it is heavy enough and not too deep, and
dropped otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..templates import EllipseTemplate
from .ellipses import DEFAULT_SCALE, ellipse_from_gaussian, regularization, weighted_mean_cov
from .weights import CoverRegion, WeightedPoints, label_weights_of


@dataclass(frozen=True)
class CderParams:
    max_depth: int = 8
    entropy_threshold: float = 0.25
    min_region_weight: float = 0.002
    scale: float = DEFAULT_SCALE

    def __post_init__(self):
        if self.max_depth < 0 or self.entropy_threshold < 0 or self.min_region_weight <= 0 or self.scale <= 0:
            raise ValueError(f"invalid CDER parameters {self}")


@dataclass(frozen=True)
class EmittedRegion:
    region: CoverRegion
    labels: tuple[int, ...]
    templates: tuple[EllipseTemplate, ...]


class NoRegionsError(RuntimeError):
    pass


def _children(points, w, idx, bounds):
    # split at the weighted centroid; fixed child order: SW, SE, NW, NE
    cx, cy = (w[idx] / w[idx].sum()) @ points[idx]
    x0, x1, y0, y1 = bounds
    px, py = points[idx, 0], points[idx, 1]
    left, low = px < cx, py < cy
    return [
        ((x0, cx, y0, cy), idx[left & low]),
        ((cx, x1, y0, cy), idx[~left & low]),
        ((x0, cx, cy, y1), idx[left & ~low]),
        ((cx, x1, cy, y1), idx[~left & ~low]),
    ]


def cder_search(weighted: WeightedPoints, params: CderParams = CderParams()) -> list[EmittedRegion]:
    """Depth-first quadtree search; returns emitted regions with their ellipses in visit order."""
    points, w, lab = weighted.points, weighted.weights, weighted.label_index
    L = weighted.n_labels
    if len(points) == 0:
        raise NoRegionsError("no points to cover")
    eps = regularization(points)
    x0, y0 = points.min(axis=0)
    x1, y1 = points.max(axis=0)
    emitted: list[EmittedRegion] = []

    def visit(bounds, idx, depth):
        mask = np.zeros(len(points), dtype=bool)
        mask[idx] = True
        region = CoverRegion(tuple(float(b) for b in bounds), label_weights_of(weighted, mask), depth)
        heavy = region.total_weight >= params.min_region_weight
        if heavy and region.entropy <= params.entropy_threshold:
            emitted.append(_emit(region, idx))
        elif heavy and depth < params.max_depth:
            for child_bounds, child_idx in _children(points, w, idx, bounds):
                visit(child_bounds, child_idx, depth + 1)

    def _emit(region, idx):
        shares = region.label_weights / region.total_weight
        dominant = [k for k in range(L) if shares[k] > 1.0 / L or L == 1]
        templates = []
        for k in dominant:
            sel = idx[lab[idx] == k]
            mean, cov = weighted_mean_cov(points[sel], w[sel])
            templates.append(ellipse_from_gaussian(mean, cov, params.scale, eps))
        return EmittedRegion(region, tuple(dominant), tuple(templates))

    visit((x0, x1, y0, y1), np.arange(len(points)), 0)
    if not emitted:
        raise NoRegionsError(
            "no region met the entropy and weight thresholds; raise entropy_threshold, "
            "lower min_region_weight or increase max_depth"
        )
    return emitted


def cder_fit(weighted: WeightedPoints, params: CderParams = CderParams()) -> list[EllipseTemplate]:
    return [t for r in cder_search(weighted, params) for t in r.templates]


def describe_regions(regions: list[EmittedRegion], classes) -> list[str]:
    lines = []
    for k, r in enumerate(regions):
        x0, x1, y0, y1 = r.region.bounds
        labs = ",".join(str(classes[i]) for i in r.labels)
        lines.append(
            f"region {k}: depth={r.region.depth} bounds=[{x0:.6g},{x1:.6g}]x[{y0:.6g},{y1:.6g}] "
            f"weight={r.region.total_weight:.6g} entropy={r.region.entropy:.6g} labels={labs}"
        )
    return lines
