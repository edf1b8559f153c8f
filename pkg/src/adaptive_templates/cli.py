"""Command line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .adaptive import METHODS, FitError
from .bottleneck import bottleneck_distance
from .config import KEYS, ConfigError, ExperimentConfig, apply_overrides, format_config, load_config
from .diagrams import DiagramFormatError, Frame, read_diagram_file
from .learn import Standardizer, accuracy, fit_kernel_ridge, polynomial_expansion, predict
from .pipeline import (
    RunFailed,
    evaluate,
    fit_systems,
    generate_dataset,
    prepare_diagram,
    reproduce_manifolds,
    results_markdown,
    results_table,
    write_dataset,
)
from .templates import featurize_collection, format_templates, read_templates

log = logging.getLogger("adaptive_templates")


class UsageError(Exception):
    pass


def _add_config_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    group = p.add_argument_group("config overrides")
    for key in KEYS:
        group.add_argument(f"--{key}", dest=f"cfg:{key}", metavar="VALUE", default=None)


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg:") and v is not None}
    return apply_overrides(cfg, overrides)


def _print_resolved(text: str) -> None:
    sys.stderr.write("# resolved configuration\n" + text)
    sys.stderr.flush()


def _read_manifest(path: Path) -> list[tuple[str, str]]:
    """``sample,label`` rows; header and comment lines are skipped."""
    rows = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("sample,"):
            continue
        parts = line.split(",")
        if len(parts) < 2:
            raise ValueError(f"{path}:line {lineno}: expected 'sample,label'")
        rows.append((parts[0], parts[1]))
    return rows


def _read_labels(path: Path) -> list[str]:
    """Labels from a manifest (last-but-seed column) or a one-label-per-line file."""
    text = path.read_text().splitlines()
    body = [line.strip() for line in text if line.strip() and not line.startswith("#")]
    if body and body[0].startswith("sample,"):
        return [lab for _, lab in _read_manifest(path)]
    return [line.split(",")[-1] for line in body]


def _load_diagrams(data: Path, manifest: Path, dims) -> tuple[list[str], dict[int, list]]:
    rows = _read_manifest(manifest)
    diagrams = {d: [read_diagram_file(data / f"{name}_h{d}.csv") for name, _ in rows] for d in dims}
    return [lab for _, lab in rows], diagrams


def cmd_generate_data(args) -> int:
    cfg = _resolve_config(args)
    out = Path(args.out or cfg.output)
    _print_resolved(format_config(cfg) + f"out = {out}\n")
    samples = generate_dataset(cfg, cfg.seed, cfg.samples_per_class)
    write_dataset(samples, out, cfg)
    print(f"wrote {len(samples)} samples to {out}")
    return 0


def cmd_fit(args) -> int:
    cfg = _resolve_config(args)
    if args.method:
        cfg = cfg.replace(method=args.method)
    data = Path(args.data)
    manifest = Path(args.labels) if args.labels else data / "manifest.csv"
    out = Path(args.out)
    _print_resolved(format_config(cfg) + f"data = {data}\nlabels = {manifest}\nout = {out}\n")
    labels, raw = _load_diagrams(data, manifest, cfg.dims)
    prepared = {d: [prepare_diagram(D, cfg) for D in raw[d]] for d in cfg.dims}
    systems, report = fit_systems(cfg, prepared, labels, cfg.seed)
    out.mkdir(parents=True, exist_ok=True)
    for dim, system in zip(cfg.dims, systems):
        (out / f"templates_h{dim}.txt").write_text(format_templates(system))
    (out / "fit_report.txt").write_text("\n".join(report) + "\n")
    print("\n".join(report))
    return 0


def cmd_featurize(args) -> int:
    systems = [read_templates(p) for p in args.templates]
    _print_resolved("".join(f"templates = {p}\n" for p in args.templates)
                    + f"data = {args.data}\nlabels = {args.labels}\nout = {args.out}\n"
                    + f"infinite_cap = {args.infinite_cap}\n")
    cfg = ExperimentConfig(infinite_cap=args.infinite_cap or 0.0)
    if args.diagrams:
        if len(systems) != 1:
            raise UsageError("diagram files given directly need exactly one --templates file")
        samples = [prepare_diagram(read_diagram_file(p), cfg) for p in args.diagrams]
    elif args.data:
        data = Path(args.data)
        manifest = Path(args.labels) if args.labels else data / "manifest.csv"
        dims = list(range(len(systems)))
        _, raw = _load_diagrams(data, manifest, dims)
        samples = [tuple(prepare_diagram(raw[d][i], cfg) for d in dims) for i in range(len(raw[0]))]
    else:
        raise UsageError("give diagram files or --data")
    X = featurize_collection(systems, samples)
    header = "columns: " + ",".join(f"h{d}:{k}" for d, T in enumerate(systems) for k in range(len(T)))
    np.savetxt(args.out, X, delimiter=",", fmt="%.17g", header=header)
    print(f"wrote {X.shape[0]}x{X.shape[1]} feature matrix to {args.out}")
    return 0


def _load_matrix(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#", ndmin=2))


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    _print_resolved(format_config(cfg) + f"features = {args.features}\nlabels = {args.labels}\n")
    X = _load_matrix(args.features)
    y = np.asarray(_read_labels(Path(args.labels)))
    if len(X) != len(y):
        raise ValueError(f"feature matrix has {len(X)} rows but the label file has {len(y)} labels")
    X = polynomial_expansion(X, cfg.poly_degree)
    scaler = Standardizer.fit(X)
    model = fit_kernel_ridge(scaler.transform(X), y, cfg.kernel_spec(), cfg.lam)
    print(f"train_accuracy={accuracy(y, predict(model, scaler.transform(X)))!r}")
    if args.test_features:
        Xt = polynomial_expansion(_load_matrix(args.test_features), cfg.poly_degree)
        pred = predict(model, scaler.transform(Xt))
        if args.predictions:
            Path(args.predictions).write_text("".join(f"{p}\n" for p in pred.tolist()))
        if args.test_labels:
            yt = np.asarray(_read_labels(Path(args.test_labels)))
            if len(yt) != len(Xt):
                raise ValueError(f"test feature matrix has {len(Xt)} rows but the test label file has {len(yt)} labels")
            print(f"test_accuracy={accuracy(yt, pred)!r}")
    if args.out:
        np.savez(args.out, dual_coef=model.dual_coef, X_train=model.X_train, classes=model.classes,
                 mean=scaler.mean, scale=scaler.scale, kernel=model.spec.kind, gamma=model.spec.gamma,
                 coef0=model.spec.coef0, degree=model.spec.degree, lam=model.lam)
    return 0


def _write_results(results, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_table(results))
    (out / "results.md").write_text(results_markdown(results))
    sys.stdout.write(results_table(results))


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    _print_resolved(format_config(cfg))
    out = Path(cfg.output)
    _write_results([evaluate(cfg, cfg.samples_per_class, out)], out)
    return 0


def cmd_reproduce(args) -> int:
    cfg = _resolve_config(args)
    _print_resolved(format_config(cfg))
    results = reproduce_manifolds(cfg)
    sys.stdout.write(results_table(results))
    return 0


def cmd_bottleneck(args) -> int:
    _print_resolved(f"file1 = {args.file1}\nfile2 = {args.file2}\n")
    d = bottleneck_distance(read_diagram_file(args.file1), read_diagram_file(args.file2))
    print(repr(d))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptive-templates", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="sample manifolds and write clouds, diagrams and a manifest")
    _add_config_options(p)
    p.add_argument("--out", help="output directory (default: run.output)")
    p.set_defaults(func=cmd_generate_data)

    p = sub.add_parser("fit", help="fit adaptive templates to a labeled diagram directory")
    _add_config_options(p)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--data", required=True, help="directory written by generate-data")
    p.add_argument("--labels", help="sample,label manifest (default: DATA/manifest.csv)")
    p.add_argument("--out", required=True, help="directory for templates_h*.txt and fit_report.txt")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("featurize", help="evaluate template systems on diagrams")
    p.add_argument("--templates", action="append", required=True, help="template file; repeat once per dimension")
    p.add_argument("--data", help="diagram directory (uses <sample>_h<k>.csv for the k-th template file)")
    p.add_argument("--labels", help="manifest for --data (default: DATA/manifest.csv)")
    p.add_argument("--infinite-cap", type=float, default=None, help="replace infinite deaths by this value")
    p.add_argument("--out", required=True, help="output CSV matrix")
    p.add_argument("diagrams", nargs="*", help="diagram files (single template system)")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="fit kernel ridge on a feature matrix")
    _add_config_options(p)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--test-features")
    p.add_argument("--test-labels")
    p.add_argument("--predictions", help="write test predictions here")
    p.add_argument("--out", help="save the model (.npz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="repeat the pipeline at data.samples_per_class")
    _add_config_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("reproduce-manifolds", help="evaluate every size in data.sizes")
    _add_config_options(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("bottleneck", help="bottleneck distance between two diagram files")
    p.add_argument("file1")
    p.add_argument("file2")
    p.set_defaults(func=cmd_bottleneck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DiagramFormatError, FitError, RunFailed, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
