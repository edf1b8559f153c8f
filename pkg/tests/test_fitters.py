import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_templates.adaptive import (
    CderParams,
    FitError,
    FitParams,
    LabeledDiagramCollection,
    NoRegionsError,
    assign_weights,
    cder_fit,
    cder_search,
    ellipses_from_clusters,
    fit_templates,
    gmm_fit,
    hdbscan_fit,
)
from adaptive_templates.adaptive.ellipses import regularization
from adaptive_templates.adaptive.hdbscan import core_distances, mutual_reachability, prim_mst
from adaptive_templates.diagrams import Frame, PersistenceDiagram

from _oracles import brute_force_mst_lengths, components_at

BL = Frame.BIRTH_LIFETIME


def cloud(points):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return PersistenceDiagram(pts[:, 0], pts[:, 1], frame=BL)


def blob(rng, center, n, sigma):
    return np.asarray(center) + rng.normal(scale=sigma, size=(n, 2))


# -- CDER ------------------------------------------------------------------

def test_cder_two_far_blobs():
    rng = np.random.default_rng(1)
    sigma = 0.05
    A = [cloud(blob(rng, (1, 1), 20, sigma)) for _ in range(3)]
    B = [cloud(blob(rng, (8, 8), 20, sigma)) for _ in range(3)]
    wp = assign_weights(LabeledDiagramCollection(A + B, [0] * 3 + [1] * 3))
    ells = cder_fit(wp)
    assert len(ells) == 2
    means = [np.vstack([D.coords() for D in A]).mean(axis=0), np.vstack([D.coords() for D in B]).mean(axis=0)]
    for e in ells:
        assert min(np.abs(np.array(e.center) - m).max() for m in means) < 3 * sigma
    assert {np.argmin([np.linalg.norm(np.array(e.center) - m) for m in means]) for e in ells} == {0, 1}


def test_cder_interleaved_labels_raise():
    rng = np.random.default_rng(2)
    pts = rng.uniform(0.5, 2, size=(40, 2))
    # both labels see the very same points: every region has entropy 1
    wp = assign_weights(LabeledDiagramCollection([cloud(pts), cloud(pts)], [0, 1]))
    with pytest.raises(NoRegionsError, match="entropy_threshold"):
        cder_search(wp, CderParams(entropy_threshold=0.1))


def test_cder_single_label_root():
    rng = np.random.default_rng(3)
    wp = assign_weights(LabeledDiagramCollection([cloud(blob(rng, (1, 1), 30, 0.1))], ["only"]))
    regions = cder_search(wp)
    assert len(regions) == 1 and regions[0].region.depth == 0 and regions[0].region.entropy == 0.0
    assert len(regions[0].templates) == 1


def test_cder_regions_respect_thresholds_and_determinism():
    rng = np.random.default_rng(4)
    D = [cloud(rng.uniform(0.1, 2, size=(25, 2)) + (0.5 * (i % 3), 0)) for i in range(9)]
    wp = assign_weights(LabeledDiagramCollection(D, [i % 3 for i in range(9)]))
    params = CderParams(max_depth=6, entropy_threshold=0.5, min_region_weight=0.005)
    first = cder_search(wp, params)
    again = cder_search(wp, params)
    for r, s in zip(first, again):
        assert r.region.bounds == s.region.bounds and r.templates == s.templates
    for r in first:
        assert r.region.entropy <= 0.5 and r.region.total_weight >= 0.005 and r.region.depth <= 6
        shares = r.region.label_weights / r.region.total_weight
        assert list(r.labels) == [k for k in range(3) if shares[k] > 1 / 3]


def test_cder_params_validated():
    with pytest.raises(ValueError):
        CderParams(min_region_weight=0)


# -- GMM -------------------------------------------------------------------

def weighted_stats(X, w):
    w = np.asarray(w, float)
    mean = np.array([math.fsum(w * X[:, 0]), math.fsum(w * X[:, 1])]) / math.fsum(w)
    d = X - mean
    cov = np.array([[math.fsum(w * d[:, i] * d[:, j]) for j in range(2)] for i in range(2)]) / math.fsum(w)
    return mean, cov


@pytest.mark.parametrize("seed", range(5))
def test_gmm_single_component_closed_form(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 2)) @ rng.normal(size=(2, 2))
    w = rng.uniform(0.1, 2, size=50)
    mix = gmm_fit(X, 1, seed=seed, weights=w, max_iter=1)
    mean, cov = weighted_stats(X, w)
    eps = regularization(X)
    (c,) = mix.components
    assert mix.n_iter == 1
    assert np.allclose(c.mean, mean, rtol=1e-13, atol=1e-14)
    assert np.allclose(c.covariance, cov + eps * np.eye(2), rtol=1e-13, atol=1e-14)
    assert c.weight == 1.0


def test_gmm_two_separated_gaussians():
    rng = np.random.default_rng(0)
    X = np.vstack([blob(rng, (0, 0), 200, 0.3), blob(rng, (5, 3), 200, 0.3)])
    mix = gmm_fit(X, 2, seed=1)
    means = sorted(tuple(c.mean) for c in mix)
    assert np.abs(np.array(means[0]) - (0, 0)).max() < 0.1
    assert np.abs(np.array(means[1]) - (5, 3)).max() < 0.1
    assert sum(c.weight for c in mix) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
@settings(max_examples=20, deadline=None)
def test_gmm_log_likelihood_monotone(seed, K):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 2)) * rng.uniform(0.1, 3, size=2)
    mix = gmm_fit(X, K, seed=seed, weights=rng.uniform(0.1, 1, size=60), tol=0.0, max_iter=60)
    assert np.all(np.diff(mix.log_likelihood) >= -1e-9)


def test_gmm_covariances_spd_and_deterministic():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 2))
    a, b = gmm_fit(X, 3, seed=9), gmm_fit(X, 3, seed=9)
    for c, d in zip(a, b):
        assert np.array_equal(c.mean, d.mean) and np.array_equal(c.covariance, d.covariance)
        assert np.linalg.eigvalsh(c.covariance).min() > 0


def test_gmm_errors():
    with pytest.raises(ValueError):
        gmm_fit(np.array([[0, 1], [0, 1], [1, 1]], float), 3)
    with pytest.raises(ValueError):
        gmm_fit(np.zeros((2, 2)), 0)


# -- HDBSCAN ---------------------------------------------------------------

def test_hdbscan_two_blobs():
    rng = np.random.default_rng(0)
    X = np.vstack([blob(rng, (0, 0), 30, 0.01), blob(rng, (10, 10), 30, 0.01)])
    res = hdbscan_fit(X, 10)
    assert len(res.clusters) == 2 and res.n_noise == 0
    oracle = components_at(X, 1.0)
    assert sorted(sorted(c.tolist()) for c in res.clusters) == sorted(sorted(c) for c in oracle)


def test_hdbscan_too_few_points():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        hdbscan_fit(rng.uniform(size=(5, 2)), 10)
    with pytest.raises(ValueError):
        hdbscan_fit(rng.uniform(size=(5, 2)), 1)


@given(st.integers(2, 64), st.integers(2, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_mst_matches_oracle(n, k, seed):
    X = np.random.default_rng(seed).normal(size=(n, 2))
    d = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    mst = prim_mst(d)
    assert math.fsum(mst[:, 2]) == pytest.approx(math.fsum(brute_force_mst_lengths(X)), abs=1e-9)
    if k <= n:
        mr = mutual_reachability(d, core_distances(d, k))
        # oracle on mutual reachability: Prim on the same dense weights done in pure Python
        in_tree, best, total = {0}, {j: mr[0, j] for j in range(1, n)}, 0.0
        while best:
            j = min(best, key=best.get)
            total += best.pop(j)
            for u in best:
                best[u] = min(best[u], mr[j, u])
        assert math.fsum(prim_mst(mr)[:, 2]) == pytest.approx(total, abs=1e-9)


def test_core_distance_counts_self():
    d = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], float)
    assert core_distances(d, 1).tolist() == [0, 0, 0]
    assert core_distances(d, 2).tolist() == [1, 1, 2]


def test_hdbscan_permutation_invariant():
    rng = np.random.default_rng(7)
    X = np.vstack([blob(rng, (0, 0), 25, 0.2), blob(rng, (3, 0), 25, 0.2), rng.uniform(-2, 5, size=(10, 2))])
    res = hdbscan_fit(X, 6)
    perm = rng.permutation(len(X))
    res_p = hdbscan_fit(X[perm], 6)
    as_sets = lambda r, idx: sorted(sorted(idx[c].tolist()) for c in r.clusters)
    assert as_sets(res, np.arange(len(X))) == as_sets(res_p, perm)


# -- ellipses --------------------------------------------------------------

def test_ellipse_from_isotropic_cluster():
    rng = np.random.default_rng(0)
    (e,) = ellipses_from_clusters([rng.normal(size=(20000, 2)) + 10], scale=4)
    assert np.allclose(e.matrix, np.eye(2) / 4, atol=0.01)


def test_two_point_cluster():
    pts = np.array([[1.0, 2.0], [3.0, 2.0]])
    (e,) = ellipses_from_clusters([pts], scale=2)
    assert np.all(np.isfinite(e.matrix))
    assert np.all(e.quadratic_form(pts) <= 1)


def test_translation_moves_center_only():
    rng = np.random.default_rng(1)
    c = rng.normal(size=(30, 2)) + 5
    v = np.array([0.5, 1.25])
    (e,) = ellipses_from_clusters([c], eps=1e-6)
    (f,) = ellipses_from_clusters([c + v], eps=1e-6)
    assert np.allclose(np.array(f.center) - e.center, v, atol=1e-12)
    assert np.allclose(f.matrix, e.matrix, rtol=1e-9)


def test_singleton_cluster_rejected():
    with pytest.raises(ValueError):
        ellipses_from_clusters([np.array([[1.0, 1.0]])])


# -- fit_templates ---------------------------------------------------------

def labeled_blobs(seed=0):
    rng = np.random.default_rng(seed)
    diagrams, labels = [], []
    for i in range(6):
        lab = i % 2
        diagrams.append(cloud(np.abs(blob(rng, (1 + 4 * lab, 2 + 2 * lab), 30, 0.2))))
        labels.append(lab)
    return LabeledDiagramCollection(diagrams, labels)


@pytest.mark.parametrize("method", ["cder", "gmm", "hdbscan"])
def test_fit_templates_methods(method):
    coll = labeled_blobs()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = fit_templates(coll, FitParams(method=method), seed=3)
        b = fit_templates(coll, FitParams(method=method), seed=3)
    assert len(a.system) > 0 and a.system.frame is BL
    assert a.system.templates == b.system.templates
    assert a.report == b.report and a.report[-1].startswith("templates=")


def test_fit_templates_gmm_component_count():
    coll = labeled_blobs()
    out = fit_templates(coll, FitParams(method="gmm", gmm_components=2))
    assert len(out.system) == 4


def test_fit_templates_failure():
    rng = np.random.default_rng(2)
    pts = rng.uniform(0.5, 2, size=(40, 2))
    coll = LabeledDiagramCollection([cloud(pts), cloud(pts)], [0, 1])
    with pytest.raises(FitError):
        fit_templates(coll, FitParams(method="cder", cder=CderParams(entropy_threshold=0.1)))
    with pytest.raises(FitError):
        fit_templates(coll, FitParams(method="hdbscan", hdbscan_min_cluster_size=100))
