"""Label-balanced point weights and region entropy for labeled diagram collections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from ..diagrams import Frame, PersistenceDiagram, to_frame


@dataclass(frozen=True)
class LabeledDiagramCollection:
    """Diagrams with one class label each, held in a common frame (birth-lifetime by default)."""

    diagrams: tuple
    labels: tuple
    frame: Frame

    def __init__(self, diagrams: Sequence[PersistenceDiagram], labels: Sequence[Hashable], frame=Frame.BIRTH_LIFETIME):
        if len(diagrams) != len(labels):
            raise ValueError(f"{len(diagrams)} diagrams but {len(labels)} labels")
        if not diagrams:
            raise ValueError("collection is empty")
        frame = Frame(frame)
        object.__setattr__(self, "diagrams", tuple(to_frame(D, frame) for D in diagrams))
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "frame", frame)

    @property
    def classes(self) -> list:
        return sorted(set(self.labels))


@dataclass(frozen=True)
class WeightedPoints:
    """Pooled diagram points (multiplicity expanded) with label and weight per point.

    ``label_index`` indexes into ``classes``; ``cloud`` is the index of the
    diagram each point came from.
    """

    points: np.ndarray
    label_index: np.ndarray
    weights: np.ndarray
    cloud: np.ndarray
    classes: tuple

    @property
    def n_labels(self) -> int:
        return len(self.classes)

    def for_label(self, k: int) -> "WeightedPoints":
        keep = self.label_index == k
        return WeightedPoints(self.points[keep], self.label_index[keep], self.weights[keep], self.cloud[keep], self.classes)

    def bbox_diagonal_sq(self) -> float:
        if len(self.points) == 0:
            return 0.0
        span = self.points.max(axis=0) - self.points.min(axis=0)
        return float(span @ span)


def assign_weights(collection: LabeledDiagramCollection) -> WeightedPoints:
    """Give every point of cloud ``X_i`` with label ``l`` the weight ``1 / (|X_i| N_l L)``.

    Each label gets total weight ``1/L``, split evenly over its clouds and
    then over the points of each cloud. Infinite points are ignored and
    multiplicities count as repeated points.
    """
    classes = collection.classes
    L = len(classes)
    index_of = {c: k for k, c in enumerate(classes)}
    n_per_label = {c: 0 for c in classes}
    for lab in collection.labels:
        n_per_label[lab] += 1
    pts, labs, ws, clouds = [], [], [], []
    for i, (D, lab) in enumerate(zip(collection.diagrams, collection.labels)):
        X = D.finite().expanded()
        if len(X) == 0:
            raise ValueError(f"diagram {i} (label {lab!r}) has no finite points")
        w = 1.0 / (len(X) * n_per_label[lab] * L)
        pts.append(X)
        labs.append(np.full(len(X), index_of[lab]))
        ws.append(np.full(len(X), w))
        clouds.append(np.full(len(X), i))
    return WeightedPoints(
        np.vstack(pts), np.concatenate(labs), np.concatenate(ws), np.concatenate(clouds), tuple(classes)
    )


def entropy_from_label_weights(label_weights, n_labels: int | None = None) -> float:
    """Base-L entropy of the label distribution given by per-label weights.

    ``0 log 0`` counts as 0; an empty distribution has entropy 0.
    """
    w = np.asarray(label_weights, dtype=np.float64)
    L = len(w) if n_labels is None else n_labels
    total = w.sum()
    if total <= 0 or L <= 1:
        return 0.0
    if len(w) == L and np.all(w == w[0]):
        return 1.0
    p = w / total
    p = p[p > 0]
    s = float(-(p * np.log(p)).sum() / math.log(L))
    if s <= 0.0:
        return 0.0  # also turns -0.0 into 0.0
    return min(s, 1.0)


@dataclass(frozen=True)
class CoverRegion:
    """Axis-aligned rectangle with its per-label weight totals and entropy."""

    bounds: tuple[float, float, float, float]
    label_weights: np.ndarray
    depth: int = 0

    @property
    def total_weight(self) -> float:
        return float(self.label_weights.sum())

    @property
    def empty(self) -> bool:
        return self.total_weight <= 0

    @property
    def entropy(self) -> float:
        return entropy_from_label_weights(self.label_weights)


def region_mask(bounds, points: np.ndarray) -> np.ndarray:
    x0, x1, y0, y1 = bounds
    return (points[:, 0] >= x0) & (points[:, 0] <= x1) & (points[:, 1] >= y0) & (points[:, 1] <= y1)


def label_weights_of(weighted: WeightedPoints, mask: np.ndarray) -> np.ndarray:
    return np.bincount(weighted.label_index[mask], weights=weighted.weights[mask], minlength=weighted.n_labels)


def region_entropy(region, weighted: WeightedPoints | None = None) -> float:
    """Entropy of a region: a :class:`CoverRegion`, or closed rectangle bounds with ``weighted``.

    Regions carrying no weight get entropy 0 (see ``CoverRegion.empty``).
    """
    if isinstance(region, CoverRegion):
        return region.entropy
    if weighted is None:
        raise ValueError("rectangle bounds need the weighted points")
    return entropy_from_label_weights(label_weights_of(weighted, region_mask(region, weighted.points)))
