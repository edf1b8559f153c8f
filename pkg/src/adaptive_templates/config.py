"""Experiment configuration stored as flat ``section.key = value`` text."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .adaptive import METHODS, CderParams, FitParams
from .diagrams import Frame
from .learn import KERNELS, KernelSpec
from .synth import MANIFOLDS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    manifolds: tuple[str, ...] = MANIFOLDS
    samples_per_class: int = 25
    sizes: tuple[int, ...] = (10, 25, 50, 100, 200)
    points_per_cloud: int = 100
    subsample: int = 0
    max_radius: float = 0.0
    infinite_cap: float = 0.0
    method: str = "cder"
    dims: tuple[int, ...] = (0, 1)
    frame: str = Frame.BIRTH_LIFETIME.value
    scale: float = 9.0
    cder_max_depth: int = CderParams.max_depth
    cder_entropy_threshold: float = CderParams.entropy_threshold
    cder_min_region_weight: float = CderParams.min_region_weight
    gmm_components: int = 3
    gmm_tol: float = 1e-8
    gmm_max_iter: int = 200
    hdbscan_min_cluster_size: int = 5
    kernel: str = "rbf"
    gamma: float = 0.0
    coef0: float = 1.0
    degree: int = 2
    lam: float = 1e-3
    poly_degree: int = 1
    test_fraction: float = 0.33
    stratified: bool = True
    repetitions: int = 10
    seed: int = 0
    output: str = "results"

    def __post_init__(self):
        try:
            self.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self):
        for m in self.manifolds:
            if m not in MANIFOLDS:
                raise ValueError(f"unknown manifold {m!r}")
        if not self.manifolds:
            raise ValueError("no manifolds selected")
        if self.samples_per_class < 2 or any(s < 2 for s in self.sizes):
            raise ValueError("need at least 2 samples per class")
        if self.points_per_cloud < 2 or self.subsample < 0 or self.subsample == 1:
            raise ValueError("clouds need at least 2 points")
        if self.max_radius < 0 or self.infinite_cap < 0:
            raise ValueError("max_radius and infinite_cap must be nonnegative (0 = default)")
        if self.method not in METHODS:
            raise ValueError(f"unknown fit method {self.method!r}")
        if not self.dims or any(d not in (0, 1) for d in self.dims):
            raise ValueError("dims must be a nonempty subset of {0, 1}")
        Frame(self.frame)
        self.fit_params()
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.gamma < 0 or self.lam <= 0 or self.poly_degree < 1 or self.degree < 1:
            raise ValueError("gamma >= 0, lambda > 0 and degrees >= 1 required")
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")

    def fit_params(self) -> FitParams:
        return FitParams(
            method=self.method,
            scale=self.scale,
            cder=CderParams(self.cder_max_depth, self.cder_entropy_threshold, self.cder_min_region_weight, self.scale),
            gmm_components=self.gmm_components,
            gmm_tol=self.gmm_tol,
            gmm_max_iter=self.gmm_max_iter,
            hdbscan_min_cluster_size=self.hdbscan_min_cluster_size,
        )

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, self.gamma or None, self.coef0, self.degree)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


# dotted key -> field name
KEYS = {
    "data.manifolds": "manifolds",
    "data.samples_per_class": "samples_per_class",
    "data.sizes": "sizes",
    "data.points_per_cloud": "points_per_cloud",
    "data.subsample": "subsample",
    "data.max_radius": "max_radius",
    "data.infinite_cap": "infinite_cap",
    "fit.method": "method",
    "fit.dims": "dims",
    "fit.frame": "frame",
    "fit.scale": "scale",
    "fit.cder.max_depth": "cder_max_depth",
    "fit.cder.entropy_threshold": "cder_entropy_threshold",
    "fit.cder.min_region_weight": "cder_min_region_weight",
    "fit.gmm.components": "gmm_components",
    "fit.gmm.tol": "gmm_tol",
    "fit.gmm.max_iter": "gmm_max_iter",
    "fit.hdbscan.min_cluster_size": "hdbscan_min_cluster_size",
    "learn.kernel": "kernel",
    "learn.gamma": "gamma",
    "learn.coef0": "coef0",
    "learn.degree": "degree",
    "learn.lambda": "lam",
    "learn.poly_degree": "poly_degree",
    "learn.test_fraction": "test_fraction",
    "learn.stratified": "stratified",
    "run.repetitions": "repetitions",
    "run.seed": "seed",
    "run.output": "output",
}
FIELD_TO_KEY = {v: k for k, v in KEYS.items()}
_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(name: str, text: str):
    kind = _TYPES[name]
    text = text.strip()
    try:
        if kind == "tuple[str, ...]":
            return tuple(t.strip() for t in text.split(",") if t.strip())
        if kind == "tuple[int, ...]":
            return tuple(int(t) for t in text.split(",") if t.strip())
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        return text
    except ValueError as exc:
        raise ConfigError(f"{FIELD_TO_KEY[name]}: {exc}") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def apply_overrides(cfg: ExperimentConfig, overrides: dict[str, str]) -> ExperimentConfig:
    changes = {}
    for key, text in overrides.items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        changes[KEYS[key]] = _parse_value(KEYS[key], text)
    return cfg.replace(**changes)


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        overrides[key] = value
    return apply_overrides(base or ExperimentConfig(), overrides)


def format_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{key} = {_format_value(getattr(cfg, name))}\n" for key, name in KEYS.items())


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(format_config(cfg))
