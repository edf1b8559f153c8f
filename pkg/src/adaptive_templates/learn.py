"""Kernel ridge classification on template features."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist

KERNELS = ("polynomial", "rbf", "sigmoid")
MAX_EXPANDED_COLUMNS = 200_000


def monomial_exponents(n_features: int, degree: int) -> list[tuple[int, ...]]:
    """Index tuples of all monomials of total degree 1..degree, graded lexicographic order."""
    out = []
    for d in range(1, degree + 1):
        out.extend(combinations_with_replacement(range(n_features), d))
    return out


def polynomial_expansion(X, degree: int, max_columns: int = MAX_EXPANDED_COLUMNS) -> np.ndarray:
    """All monomials of the columns of ``X`` with total degree ``1..degree`` (no constant column)."""
    X = np.asarray(X, dtype=np.float64)
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if degree == 1:
        return X.copy()
    F = X.shape[1]
    count = sum(math.comb(F + d - 1, d) for d in range(1, degree + 1))
    if count > max_columns:
        raise ValueError(f"expansion would create {count} columns (cap {max_columns})")
    cols = [np.prod(X[:, list(idx)], axis=1) for idx in monomial_exponents(F, degree)]
    return np.column_stack(cols) if cols else np.zeros((len(X), 0))


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = None  # None: 1 / n_features
    coef0: float = 1.0
    degree: int = 2

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; choose from {', '.join(KERNELS)}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError("polynomial degree must be a positive integer")

    def resolved_gamma(self, n_features: int) -> float:
        return self.gamma if self.gamma is not None else 1.0 / max(n_features, 1)


def gram(X1, X2, spec: KernelSpec = KernelSpec()) -> np.ndarray:
    X1 = np.atleast_2d(np.asarray(X1, dtype=np.float64))
    X2 = np.atleast_2d(np.asarray(X2, dtype=np.float64))
    if X1.shape[1] != X2.shape[1]:
        raise ValueError(f"feature dimensions differ: {X1.shape[1]} vs {X2.shape[1]}")
    g = spec.resolved_gamma(X1.shape[1])
    if spec.kind == "rbf":
        return np.exp(-g * cdist(X1, X2, "sqeuclidean"))
    inner = X1 @ X2.T
    if spec.kind == "polynomial":
        return (g * inner + spec.coef0) ** spec.degree
    return np.tanh(g * inner + spec.coef0)


@dataclass
class Standardizer:
    """Column scaling fitted on training data; constant columns map to zero."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
        scale = np.where(constant, np.inf, std)
        return cls(mean, scale)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != len(self.mean):
            raise ValueError(f"expected {len(self.mean)} features, got {X.shape[1]}")
        return (X - self.mean) / self.scale


@dataclass
class RidgeModel:
    dual_coef: np.ndarray
    X_train: np.ndarray
    spec: KernelSpec
    lam: float
    classes: np.ndarray
    residual: float = field(default=0.0)

    def scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.X_train.shape[1]:
            raise ValueError(f"model expects {self.X_train.shape[1]} features, got {X.shape[1]}")
        return gram(X, self.X_train, self._fixed_spec()) @ self.dual_coef

    def _fixed_spec(self) -> KernelSpec:
        return KernelSpec(self.spec.kind, self.spec.resolved_gamma(self.X_train.shape[1]), self.spec.coef0, self.spec.degree)


def one_hot(labels, classes) -> np.ndarray:
    index = {c: k for k, c in enumerate(classes.tolist())}
    Y = np.zeros((len(labels), len(classes)))
    for i, lab in enumerate(np.asarray(labels).tolist()):
        Y[i, index[lab]] = 1.0
    return Y


def fit_kernel_ridge(X, labels, spec: KernelSpec = KernelSpec(), lam: float = 1e-3) -> RidgeModel:
    """Solve ``(K + lam I) alpha = Y`` by Cholesky for the one-hot label matrix ``Y``.

    Features are used as given; standardize them beforehand.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels)
    if len(X) != len(labels):
        raise ValueError(f"{len(X)} feature rows but {len(labels)} labels")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    classes = np.unique(labels)
    Y = one_hot(labels, classes)
    spec = KernelSpec(spec.kind, spec.resolved_gamma(X.shape[1]), spec.coef0, spec.degree)
    K = gram(X, X, spec)
    if not np.all(np.isfinite(K)):
        raise ValueError("kernel matrix has non-finite entries")
    A = K + lam * np.eye(len(X))
    try:
        alpha = cho_solve(cho_factor(A, lower=True), Y)
    except LinAlgError as exc:
        raise ValueError(f"Cholesky factorization failed: {exc}") from None
    residual = float(np.abs(A @ alpha - Y).max())
    return RidgeModel(alpha, X, spec, lam, classes, residual)


def predict(model: RidgeModel, X) -> np.ndarray:
    """Arg-max class of the kernel scores; ties go to the smallest class id."""
    S = model.scores(X)
    # np.argmax returns the first maximum, and classes are sorted ascending
    return model.classes[np.argmax(S, axis=1)]


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    return float((y_true == y_pred).mean()) if len(y_true) else float("nan")


def split_train_test(n: int, test_fraction: float, seed: int, labels=None, stratified: bool = True):
    """Shuffle-split indices ``0..n-1`` into sorted ``(train, test)`` arrays.

    Stratified splits take ``floor(test_fraction * n_c)`` test samples from
    each class ``c``; otherwise ``floor(test_fraction * n)`` overall.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    if stratified and labels is not None:
        labels = np.asarray(labels)
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} samples")
        test = []
        for c in np.unique(labels):
            members = np.flatnonzero(labels == c)
            if len(members) < 2:
                raise ValueError(f"class {c!r} has {len(members)} sample(s); stratification needs at least 2")
            k = math.floor(test_fraction * len(members) + 1e-9)
            test.extend(rng.permutation(members)[:k].tolist())
        test = np.sort(np.asarray(test, dtype=np.int64))
    else:
        k = math.floor(test_fraction * n + 1e-9)
        test = np.sort(rng.permutation(n)[:k])
    train = np.setdiff1d(np.arange(n), test)
    return train, test


@dataclass
class Summary:
    mean: float
    std: float
    values: list[float]


def summarize(values) -> Summary:
    v = np.asarray(values, dtype=np.float64)
    return Summary(float(v.mean()), float(v.std()), v.tolist())
