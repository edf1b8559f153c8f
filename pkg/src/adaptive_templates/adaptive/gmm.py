"""Weighted Gaussian mixtures in the plane fitted by expectation-maximization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .ellipses import regularization


@dataclass(frozen=True)
class GaussianComponent:
    mean: np.ndarray
    covariance: np.ndarray
    weight: float


@dataclass
class GaussianMixture:
    components: list[GaussianComponent]
    log_likelihood: list[float] = field(default_factory=list)
    n_iter: int = 0
    converged: bool = False

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)


def _log_gauss(X, mean, cov):
    # closed-form 2x2 Cholesky
    a = np.sqrt(cov[0, 0])
    b = cov[1, 0] / a
    c = np.sqrt(cov[1, 1] - b * b)
    d = X - mean
    u = d[:, 0] / a
    v = (d[:, 1] - b * u) / c
    return -0.5 * (u * u + v * v) - np.log(a * c) - np.log(2 * np.pi)


def _e_step(X, w, means, covs, mix, eps):
    # each point is smeared into N(x, eps I); the expected log density picks up
    # -eps/2 tr(cov^-1), which makes "weighted covariance + eps I" the exact M-step
    with np.errstate(divide="ignore"):
        logp = np.column_stack([
            np.log(mix[k]) + _log_gauss(X, means[k], covs[k])
            - 0.5 * eps * (covs[k][0, 0] + covs[k][1, 1]) / np.linalg.det(covs[k])
            for k in range(len(mix))
        ])
    norm = logsumexp(logp, axis=1)
    resp = np.exp(logp - norm[:, None])
    return resp, float(w @ norm)


def _m_step(X, w, resp, eps, prev_means, prev_covs):
    wr = resp * w[:, None]
    nk = wr.sum(axis=0)
    means = prev_means.copy()
    covs = prev_covs.copy()
    for k in range(resp.shape[1]):
        if nk[k] <= 1e-300:
            # component lost all responsibility; keep it where it was
            continue
        means[k] = (wr[:, k] @ X) / nk[k]
        d = X - means[k]
        covs[k] = (d * wr[:, k:k + 1]).T @ d / nk[k] + eps * np.eye(2)
    return means, covs, nk / nk.sum()


def _seed_means(X, w, K, rng):
    """k-means++ seeding with point weights."""
    first = rng.choice(len(X), p=w)
    centers = [X[first]]
    d2 = ((X - X[first]) ** 2).sum(axis=1)
    for _ in range(1, K):
        p = w * d2
        idx = rng.choice(len(X), p=p / p.sum())
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def gmm_fit(points, K: int = 3, seed: int = 0, weights=None, tol: float = 1e-8,
            max_iter: int = 200, eps: float | None = None) -> GaussianMixture:
    """Fit ``K`` Gaussians to weighted 2-D points.

    The objective is ``sum_i w_i log p(x_i)`` with weights normalized to sum
    1, where each component density carries the factor
    ``exp(-eps/2 tr(cov^-1))``. That is the expected log density of a point
    blurred by ``N(0, eps I)``, and with it EM never decreases the objective
    while the M-step covariance is exactly the weighted covariance plus
    ``eps I``. Starts from k-means++ means, the pooled covariance and uniform
    mixing weights. Stops when an iteration improves the log-likelihood by
    less than ``tol`` or after ``max_iter`` iterations. ``eps`` (default:
    :func:`regularization` of the points) is added to every covariance
    diagonal.
    """
    X = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if K < 1:
        raise ValueError("K must be at least 1")
    if len(X) < K:
        raise ValueError(f"need at least K={K} points, got {len(X)}")
    n_distinct = len(np.unique(X, axis=0))
    if K > n_distinct:
        raise ValueError(f"K={K} exceeds the {n_distinct} distinct points")
    w = np.ones(len(X)) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (len(X),) or np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be nonnegative, one per point, with positive sum")
    w = w / w.sum()
    if eps is None:
        eps = regularization(X)
    rng = np.random.default_rng(seed)

    means = _seed_means(X, w, K, rng)
    d = X - w @ X
    pooled = (d * w[:, None]).T @ d + eps * np.eye(2)
    covs = np.repeat(pooled[None], K, axis=0)
    mix = np.full(K, 1.0 / K)

    resp, ll = _e_step(X, w, means, covs, mix, eps)
    history = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        means, covs, mix = _m_step(X, w, resp, eps, means, covs)
        resp, ll = _e_step(X, w, means, covs, mix, eps)
        history.append(ll)
        if ll - history[-2] < tol:
            converged = True
            break
    comps = [GaussianComponent(means[k].copy(), covs[k].copy(), float(mix[k])) for k in range(K)]
    return GaussianMixture(comps, history, it, converged)
