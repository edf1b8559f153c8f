import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_templates.bottleneck import bottleneck_distance, is_delta_matching
from adaptive_templates.diagrams import PersistenceDiagram, to_birth_lifetime

from _oracles import brute_force_bottleneck


def random_diagram(rng, max_points=5, grid=None):
    k = int(rng.integers(0, max_points + 1))
    if grid:
        b = rng.integers(0, grid, size=k) / 4
        d = b + rng.integers(1, grid, size=k) / 4
    else:
        b = rng.uniform(0, 1, size=k)
        d = b + rng.uniform(0.01, 1, size=k)
    return PersistenceDiagram(b, d)


def test_examples():
    D1 = PersistenceDiagram([0], [2])
    empty = PersistenceDiagram()
    assert bottleneck_distance(D1, empty) == 1.0
    assert bottleneck_distance(D1, PersistenceDiagram([0.5], [2])) == 0.5
    assert bottleneck_distance(empty, empty) == 0.0


def test_delta_matching_examples():
    D = PersistenceDiagram([0, 1], [1, 3])
    assert is_delta_matching([(0, 0), (1, 1)], D, D, 0.0)
    D1, D2 = PersistenceDiagram([0], [2]), PersistenceDiagram()
    assert not is_delta_matching([], D1, D2, 0.9)
    assert is_delta_matching([], D1, D2, 1.0)


def test_delta_matching_bad_indices():
    D = PersistenceDiagram([0], [1])
    with pytest.raises(IndexError):
        is_delta_matching([(0, 1)], D, D, 1.0)
    with pytest.raises(IndexError):
        is_delta_matching([(-1, 0)], D, D, 1.0)
    D2 = PersistenceDiagram([0, 0.5], [1, 2])
    with pytest.raises(ValueError):
        is_delta_matching([(0, 0), (0, 1)], D, D2, 1.0)


def test_multiplicity_expanded():
    D1 = PersistenceDiagram([0], [2], [2])
    D2 = PersistenceDiagram([0], [2])
    assert bottleneck_distance(D1, D2) == 1.0
    assert is_delta_matching([(0, 0)], D1, D2, 1.0)


def test_infinite_points():
    D1 = PersistenceDiagram([0, 0], [1, math.inf])
    D2 = PersistenceDiagram([0, 5], [1, math.inf])
    assert bottleneck_distance(D1, D2) == 0.0
    with pytest.raises(ValueError):
        bottleneck_distance(D1, PersistenceDiagram([0], [1]))


def test_frame_independent():
    D1, D2 = PersistenceDiagram([0, 1], [2, 4]), PersistenceDiagram([0.2], [2.5])
    assert bottleneck_distance(to_birth_lifetime(D1), D2) == bottleneck_distance(D1, D2)


@pytest.mark.parametrize("seed", range(100))
def test_agrees_with_oracle(seed):
    rng = np.random.default_rng(seed)
    D1 = random_diagram(rng, grid=8 if seed % 3 == 0 else None)
    D2 = random_diagram(rng, grid=8 if seed % 3 == 0 else None)
    d = bottleneck_distance(D1, D2)
    o = brute_force_bottleneck(D1.expanded(), D2.expanded())
    assert abs(d - o) <= 1e-12


@pytest.mark.parametrize("seed", range(50))
def test_metric_axioms(seed):
    rng = np.random.default_rng(1000 + seed)
    A, B, C = (random_diagram(rng, 6) for _ in range(3))
    ab, ba = bottleneck_distance(A, B), bottleneck_distance(B, A)
    assert ab == ba
    assert bottleneck_distance(A, C) <= ab + bottleneck_distance(B, C) + 1e-12
    assert bottleneck_distance(A, A) == 0.0
    if ab == 0.0:
        assert A == B


@given(st.integers(0, 2**32 - 1), st.floats(0, 0.05))
@settings(max_examples=60, deadline=None)
def test_perturbation_stability(seed, eps):
    rng = np.random.default_rng(seed)
    D = random_diagram(rng, 6)
    E = random_diagram(rng, 6)
    X = D.coords()
    if len(X) == 0:
        return
    moved = X + rng.uniform(-eps, eps, size=X.shape)
    moved[:, 0] = np.maximum(moved[:, 0], 0)
    moved[:, 1] = np.maximum(moved[:, 1], moved[:, 0] + 1e-3)
    shift = float(np.abs(moved - X).max())
    Dp = PersistenceDiagram(moved[:, 0], moved[:, 1], D.multiplicities)
    assert abs(bottleneck_distance(Dp, E) - bottleneck_distance(D, E)) <= shift + 1e-12

