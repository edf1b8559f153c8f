"""Turning point clusters and Gaussian components into ellipse templates."""

from __future__ import annotations

import warnings

import numpy as np

from ..templates import EllipseTemplate, SupportWarning

DEFAULT_SCALE = 9.0
EPS_FACTOR = 1e-6


def regularization(points: np.ndarray) -> float:
    """Covariance floor: ``1e-6`` times the squared bounding-box diagonal (1e-12 for a single point)."""
    pts = np.asarray(points, dtype=np.float64)
    span = pts.max(axis=0) - pts.min(axis=0) if len(pts) else np.zeros(2)
    diag_sq = float(span @ span)
    return EPS_FACTOR * diag_sq if diag_sq > 0 else 1e-12


def weighted_mean_cov(points: np.ndarray, weights=None):
    pts = np.asarray(points, dtype=np.float64)
    w = np.ones(len(pts)) if weights is None else np.asarray(weights, dtype=np.float64)
    w = w / w.sum()
    mean = w @ pts
    d = pts - mean
    return mean, (d * w[:, None]).T @ d


def ellipse_from_gaussian(mean, cov, scale: float = DEFAULT_SCALE, eps: float = 0.0) -> EllipseTemplate:
    """Ellipse with ``A = (scale * (cov + eps I))^-1``: the Mahalanobis ball of radius ``sqrt(scale)``."""
    cov = np.asarray(cov, dtype=np.float64) + eps * np.eye(2)
    A = np.linalg.inv(scale * cov)
    A = (A + A.T) / 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportWarning)
        return EllipseTemplate((mean[0], mean[1]), A)


def ellipses_from_clusters(clusters, scale: float = DEFAULT_SCALE, eps: float | None = None, weights=None) -> list[EllipseTemplate]:
    """One ellipse per cluster: centered at the cluster mean, shaped by its regularized covariance.

    ``eps`` defaults to :func:`regularization` of all cluster points pooled.
    ``weights`` optionally gives one weight array per cluster.
    """
    clusters = [np.asarray(c, dtype=np.float64).reshape(-1, 2) for c in clusters]
    for k, c in enumerate(clusters):
        if len(c) < 2:
            raise ValueError(f"cluster {k} has {len(c)} point(s); need at least 2")
    if eps is None:
        eps = regularization(np.vstack(clusters)) if clusters else 0.0
    out = []
    for k, c in enumerate(clusters):
        mean, cov = weighted_mean_cov(c, None if weights is None else weights[k])
        out.append(ellipse_from_gaussian(mean, cov, scale, eps))
    return out
