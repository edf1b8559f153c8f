"""End-to-end manifold experiment: generate, fit, featurize, train, evaluate.

Seeds: repetition ``r`` uses ``cfg.seed + r``. Every stage derives its own
seed from that with :func:`derive_seed` and a stage name, so the cloud for
``(kind, index)`` does not depend on how many samples per class are drawn.
"""

from __future__ import annotations

import logging
import math
import traceback
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adaptive import FitError, LabeledDiagramCollection, fit_templates
from .config import ExperimentConfig, format_config
from .diagrams import Frame, PersistenceDiagram, to_frame, write_diagram_file
from .learn import Standardizer, accuracy, fit_kernel_ridge, polynomial_expansion, predict, split_train_test, summarize
from .seeds import derive_seed
from .synth import MANIFOLDS, PointCloud, rips_persistence, sample_manifold
from .templates import SupportWarning, featurize_collection, write_templates

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sample:
    kind: str
    index: int
    seed: int
    cloud: PointCloud
    h0: PersistenceDiagram
    h1: PersistenceDiagram

    @property
    def name(self) -> str:
        return f"{self.kind}/{self.index}"

    def diagram(self, dim: int) -> PersistenceDiagram:
        return self.h0 if dim == 0 else self.h1


# in-process memo of (cloud, h0, h1); keys cover every input of the computation
_CACHE: dict[tuple, tuple] = {}
_CACHE_LIMIT = 20_000


def clear_cache():
    _CACHE.clear()


def make_sample(cfg: ExperimentConfig, rep_seed: int, kind: str, index: int) -> Sample:
    seed = derive_seed(rep_seed, "synth", MANIFOLDS.index(kind), index)
    key = (kind, index, seed, cfg.points_per_cloud, cfg.subsample, cfg.max_radius)
    hit = _CACHE.get(key)
    if hit is None:
        cloud = sample_manifold(kind, cfg.points_per_cloud, seed)
        if 0 < cfg.subsample < len(cloud):
            rng = np.random.default_rng(derive_seed(seed, "subsample"))
            keep = np.sort(rng.choice(len(cloud), size=cfg.subsample, replace=False))
            cloud = PointCloud(cloud.points[keep].copy(), seed, kind)
        h0, h1 = rips_persistence(cloud, 1, cfg.max_radius or None)
        hit = (cloud, h0, h1)
        if len(_CACHE) < _CACHE_LIMIT:
            _CACHE[key] = hit
    return Sample(kind, index, seed, *hit)


def generate_dataset(cfg: ExperimentConfig, rep_seed: int, samples_per_class: int) -> list[Sample]:
    return [make_sample(cfg, rep_seed, kind, i) for kind in cfg.manifolds for i in range(samples_per_class)]


def prepare_diagram(D: PersistenceDiagram, cfg: ExperimentConfig) -> PersistenceDiagram:
    """Cap or drop infinite points, then move to the working frame."""
    D = D.cap_infinite(cfg.infinite_cap) if cfg.infinite_cap > 0 else D.finite()
    return to_frame(D, Frame(cfg.frame))


def write_dataset(samples: list[Sample], out: Path, cfg: ExperimentConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for s in samples:
        d = out / s.kind
        d.mkdir(exist_ok=True)
        np.savetxt(d / f"{s.index}_cloud.csv", s.cloud.points, delimiter=",", fmt="%.17g")
        write_diagram_file(s.h0, d / f"{s.index}_h0.csv")
        write_diagram_file(s.h1, d / f"{s.index}_h1.csv")
    lines = ["# manifest written by generate-data"]
    lines += ["# " + line for line in format_config(cfg).splitlines()]
    lines.append("sample,label,seed")
    lines += [f"{s.name},{s.kind},{s.seed}" for s in samples]
    (out / "manifest.csv").write_text("\n".join(lines) + "\n")


def fit_systems(cfg: ExperimentConfig, diagrams_by_dim: dict[int, list], labels, seed: int):
    """Fit one template system per homology dimension on training diagrams.

    Diagrams without finite points carry no weight and are left out of the
    fit; they are still featurized (to zero vectors).
    """
    systems, report = [], []
    for dim in cfg.dims:
        kept = [(D, lab) for D, lab in zip(diagrams_by_dim[dim], labels) if len(D) > 0]
        if not kept:
            raise FitError(f"no nonempty H{dim} diagrams to fit")
        coll = LabeledDiagramCollection([d for d, _ in kept], [lab for _, lab in kept], Frame(cfg.frame))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SupportWarning)
            outcome = fit_templates(coll, cfg.fit_params(), seed=derive_seed(seed, "fit", dim))
        report.append(f"[H{dim}] diagrams={len(kept)}/{len(labels)}")
        report += outcome.report
        systems.append(outcome.system)
    return systems, report


@dataclass
class RepetitionResult:
    rep: int
    train_accuracy: float = math.nan
    test_accuracy: float = math.nan
    n_features: int = 0
    report: list[str] = field(default_factory=list)
    error: str | None = None


def run_repetition(cfg: ExperimentConfig, samples_per_class: int, rep: int, out: Path | None = None) -> RepetitionResult:
    rep_seed = cfg.seed + rep
    result = RepetitionResult(rep)
    samples = generate_dataset(cfg, rep_seed, samples_per_class)
    labels = np.array([MANIFOLDS.index(s.kind) for s in samples])
    train, test = split_train_test(len(samples), cfg.test_fraction, derive_seed(rep_seed, "split"), labels, cfg.stratified)
    prepared = {dim: [prepare_diagram(s.diagram(dim), cfg) for s in samples] for dim in cfg.dims}
    systems, report = fit_systems(cfg, {d: [prepared[d][i] for i in train] for d in cfg.dims}, labels[train], rep_seed)
    result.report = report
    X = featurize_collection(systems, [tuple(prepared[d][i] for d in cfg.dims) for i in range(len(samples))])
    X = polynomial_expansion(X, cfg.poly_degree)
    scaler = Standardizer.fit(X[train])
    X_train, X_test = scaler.transform(X[train]), scaler.transform(X[test])
    model = fit_kernel_ridge(X_train, labels[train], cfg.kernel_spec(), cfg.lam)
    result.train_accuracy = accuracy(labels[train], predict(model, X_train))
    result.test_accuracy = accuracy(labels[test], predict(model, X_test))
    result.n_features = X.shape[1]
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        for dim, system in zip(cfg.dims, systems):
            write_templates(system, out / f"templates_h{dim}.txt")
        (out / "fit_report.txt").write_text("\n".join(report + [
            f"features={X.shape[1]} train={len(train)} test={len(test)}",
            f"train_accuracy={result.train_accuracy!r} test_accuracy={result.test_accuracy!r}",
        ]) + "\n")
    return result


class RunFailed(RuntimeError):
    pass


@dataclass
class EvaluationResult:
    method: str
    kernel: str
    samples_per_class: int
    repetitions: list[RepetitionResult]

    @property
    def completed(self) -> list[RepetitionResult]:
        return [r for r in self.repetitions if r.error is None]

    @property
    def aborted(self) -> list[RepetitionResult]:
        return [r for r in self.repetitions if r.error is not None]

    def stats(self):
        done = self.completed
        return summarize([r.train_accuracy for r in done]), summarize([r.test_accuracy for r in done])


def evaluate(cfg: ExperimentConfig, samples_per_class: int | None = None, out: Path | None = None) -> EvaluationResult:
    """Run the pipeline ``cfg.repetitions`` times; a failing repetition is recorded, not raised.

    Raises :class:`RunFailed` when more than half of the repetitions abort.
    """
    n = samples_per_class or cfg.samples_per_class
    reps = []
    for r in range(cfg.repetitions):
        rep_out = None if out is None else out / f"size_{n}" / f"rep_{r}"
        try:
            res = run_repetition(cfg, n, r, rep_out)
        except (FitError, ValueError, np.linalg.LinAlgError) as exc:
            res = RepetitionResult(r, error=f"{type(exc).__name__}: {exc}")
            log.warning("size %d repetition %d aborted: %s", n, r, res.error)
            log.debug("%s", traceback.format_exc())
            if rep_out is not None:
                rep_out.mkdir(parents=True, exist_ok=True)
                (rep_out / "error.txt").write_text(res.error + "\n")
        reps.append(res)
        log.info("size %d rep %d: train=%.4f test=%.4f", n, r, res.train_accuracy, res.test_accuracy)
    result = EvaluationResult(cfg.method, cfg.kernel, n, reps)
    if len(result.aborted) * 2 > len(reps):
        raise RunFailed(f"{len(result.aborted)} of {len(reps)} repetitions aborted at size {n}: {result.aborted[0].error}")
    return result


RESULT_COLUMNS = ("method", "kernel", "n_samples", "train_mean", "train_std", "test_mean", "test_std")


def results_table(results: list[EvaluationResult]) -> str:
    lines = [",".join(RESULT_COLUMNS)]
    for res in results:
        tr, te = res.stats()
        lines.append(",".join([res.method, res.kernel, str(res.samples_per_class),
                               f"{tr.mean:.6f}", f"{tr.std:.6f}", f"{te.mean:.6f}", f"{te.std:.6f}"]))
    return "\n".join(lines) + "\n"


def results_markdown(results: list[EvaluationResult]) -> str:
    if not results:
        return ""
    method = results[0].method.upper()
    lines = [
        f"Manifold classification ({method} templates, {results[0].kernel} kernel ridge); "
        "rows = samples per manifold, mean +- std over repetitions.",
        "",
        f"| samples | {method} train | {method} test | completed |",
        "|---|---|---|---|",
    ]
    for res in results:
        tr, te = res.stats()
        lines.append(f"| {res.samples_per_class} | {tr.mean:.2f} +- {tr.std:.3f} | {te.mean:.2f} +- {te.std:.3f} | "
                     f"{len(res.completed)}/{len(res.repetitions)} |")
    return "\n".join(lines) + "\n"


def reproduce_manifolds(cfg: ExperimentConfig, out: Path | None = None) -> list[EvaluationResult]:
    """Evaluate every size in ``cfg.sizes``; writes ``results.csv`` and ``results.md`` to ``out``."""
    out = Path(cfg.output) if out is None else out
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(format_config(cfg))
    results = [evaluate(cfg, n, out) for n in cfg.sizes]
    (out / "results.csv").write_text(results_table(results))
    (out / "results.md").write_text(results_markdown(results))
    return results
