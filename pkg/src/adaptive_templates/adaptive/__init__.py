"""Data-driven ellipse template systems: entropy cover search, Gaussian mixtures, HDBSCAN."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..templates import TemplateSystem
from .cder import CderParams, NoRegionsError, cder_fit, cder_search, describe_regions
from .ellipses import DEFAULT_SCALE, ellipse_from_gaussian, ellipses_from_clusters, regularization
from .gmm import GaussianComponent, GaussianMixture, gmm_fit
from .hdbscan import HdbscanResult, hdbscan_fit
from .weights import (
    CoverRegion,
    LabeledDiagramCollection,
    WeightedPoints,
    assign_weights,
    entropy_from_label_weights,
    region_entropy,
)

METHODS = ("cder", "gmm", "hdbscan")


@dataclass(frozen=True)
class FitParams:
    method: str = "cder"
    scale: float = DEFAULT_SCALE
    cder: CderParams = CderParams()
    gmm_components: int = 3
    gmm_tol: float = 1e-8
    gmm_max_iter: int = 200
    hdbscan_min_cluster_size: int = 5

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown fit method {self.method!r}; choose from {', '.join(METHODS)}")


@dataclass
class FitOutcome:
    system: TemplateSystem
    report: list[str] = field(default_factory=list)


class FitError(RuntimeError):
    pass


def fit_templates(collection: LabeledDiagramCollection, params: FitParams = FitParams(), seed: int = 0) -> FitOutcome:
    """Fit an ellipse template system to a labeled collection.

    GMM and HDBSCAN run separately on the pooled points of each label; the
    union of the per-label ellipses, in label order, forms the system.
    """
    weighted = assign_weights(collection)
    eps = regularization(weighted.points)
    report = [f"method={params.method} labels={len(weighted.classes)} points={len(weighted.points)}"]
    templates = []
    if params.method == "cder":
        cp = params.cder if params.cder.scale == params.scale else CderParams(
            params.cder.max_depth, params.cder.entropy_threshold, params.cder.min_region_weight, params.scale)
        try:
            regions = cder_search(weighted, cp)
        except NoRegionsError as exc:
            raise FitError(str(exc)) from None
        report += describe_regions(regions, weighted.classes)
        templates = [t for r in regions for t in r.templates]
    else:
        for k, cls in enumerate(weighted.classes):
            part = weighted.for_label(k)
            if params.method == "gmm":
                n_distinct = len(np.unique(part.points, axis=0))
                K = min(params.gmm_components, n_distinct)
                mix = gmm_fit(part.points, K, seed=seed + k, weights=part.weights,
                              tol=params.gmm_tol, max_iter=params.gmm_max_iter, eps=eps)
                report.append(f"label {cls}: K={K} iterations={mix.n_iter} log_likelihood={mix.log_likelihood[-1]:.6g}")
                templates += [ellipse_from_gaussian(c.mean, c.covariance, params.scale) for c in mix]
            else:
                mcs = params.hdbscan_min_cluster_size
                if len(part.points) < mcs:
                    report.append(f"label {cls}: {len(part.points)} points < min_cluster_size, skipped")
                    continue
                res = hdbscan_fit(part.points, mcs)
                sizes = [len(c) for c in res.clusters]
                report.append(f"label {cls}: clusters={len(sizes)} sizes={sizes} noise={res.n_noise}")
                templates += ellipses_from_clusters([part.points[c] for c in res.clusters], params.scale, eps)
    if not templates:
        raise FitError(f"{params.method} produced no templates")
    report.append(f"templates={len(templates)}")
    return FitOutcome(TemplateSystem(templates, collection.frame), report)


__all__ = [
    "CderParams", "CoverRegion", "FitError", "FitOutcome", "FitParams", "GaussianComponent", "GaussianMixture",
    "HdbscanResult", "LabeledDiagramCollection", "METHODS", "NoRegionsError", "WeightedPoints", "assign_weights",
    "cder_fit", "cder_search", "ellipses_from_clusters", "entropy_from_label_weights", "fit_templates", "gmm_fit",
    "hdbscan_fit", "region_entropy",
]
