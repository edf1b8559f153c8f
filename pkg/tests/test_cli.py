import subprocess
import sys

import numpy as np
import pytest

from adaptive_templates.cli import main
from adaptive_templates.diagrams import read_diagram_file

SMALL = ["--data.points_per_cloud", "30"]


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "data" / "nested"
    assert main(["generate-data", "--data.samples_per_class", "10", *SMALL, "--out", str(out)]) == 0
    return out


def test_generate_data_file_counts(data_dir):
    files = [p for p in data_dir.rglob("*") if p.is_file()]
    assert sum(p.name.endswith("_cloud.csv") for p in files) == 60
    assert sum(p.name.endswith(("_h0.csv", "_h1.csv")) for p in files) == 120
    assert (data_dir / "manifest.csv").exists() and len(files) == 181
    rows = [l for l in (data_dir / "manifest.csv").read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "sample,label,seed" and len(rows) == 61


def test_generate_data_deterministic(data_dir, tmp_path):
    again = tmp_path / "again"
    assert main(["generate-data", "--data.samples_per_class", "10", *SMALL, "--out", str(again)]) == 0
    for p in data_dir.rglob("*"):
        if p.is_file():
            assert (again / p.relative_to(data_dir)).read_bytes() == p.read_bytes()


def test_generated_diagrams_parse(data_dir):
    D = read_diagram_file(data_dir / "cube" / "0_h0.csv")
    assert D.n_infinite == 1 and D.total_multiplicity == 30


def test_resolved_config_printed(data_dir, tmp_path, capsys):
    assert main(["fit", "--data", str(data_dir), "--out", str(tmp_path / "f"), "--fit.scale", "4"]) == 0
    err = capsys.readouterr().err
    assert "fit.scale = 4.0" in err and "learn.lambda = 0.001" in err


@pytest.mark.parametrize("method", ["cder", "gmm", "hdbscan"])
def test_fit_featurize_train(data_dir, tmp_path, method, capsys):
    fit = tmp_path / "fit"
    assert main(["fit", "--method", method, "--data", str(data_dir), "--out", str(fit)]) == 0
    assert {p.name for p in fit.iterdir()} == {"templates_h0.txt", "templates_h1.txt", "fit_report.txt"}
    feats = tmp_path / "X.csv"
    assert main(["featurize", "--templates", str(fit / "templates_h0.txt"), "--templates", str(fit / "templates_h1.txt"),
                 "--data", str(data_dir), "--out", str(feats)]) == 0
    X = np.loadtxt(feats, delimiter=",")
    assert X.shape[0] == 60
    model = tmp_path / "m.npz"
    preds = tmp_path / "pred.txt"
    rc = main(["train", "--features", str(feats), "--labels", str(data_dir / "manifest.csv"),
               "--test-features", str(feats), "--test-labels", str(data_dir / "manifest.csv"),
               "--predictions", str(preds), "--out", str(model)])
    assert rc == 0
    assert "train_accuracy=" in capsys.readouterr().out
    assert len(preds.read_text().splitlines()) == 60
    assert set(np.load(model).files) >= {"dual_coef", "X_train", "classes", "mean", "scale"}


def test_featurize_three_diagrams_five_templates(data_dir, tmp_path):
    tpl = tmp_path / "t.txt"
    tpl.write_text("# frame=birth-lifetime\n" + "".join(f"tent,{0.1 * k!r},0.5,0.25\n" for k in range(5)))
    out = tmp_path / "X.csv"
    diagrams = [str(data_dir / "cube" / f"{i}_h0.csv") for i in range(3)]
    assert main(["featurize", "--templates", str(tpl), *diagrams, "--out", str(out)]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (3, 5)


def test_outputs_byte_identical(data_dir, tmp_path):
    for k in (1, 2):
        assert main(["fit", "--method", "gmm", "--data", str(data_dir), "--out", str(tmp_path / f"f{k}")]) == 0
        assert main(["featurize", "--templates", str(tmp_path / f"f{k}" / "templates_h1.txt"),
                     "--templates", str(tmp_path / f"f{k}" / "templates_h0.txt"),
                     "--data", str(data_dir), "--out", str(tmp_path / f"X{k}.csv")]) == 0
    for name in ("templates_h0.txt", "templates_h1.txt", "fit_report.txt"):
        assert (tmp_path / "f1" / name).read_bytes() == (tmp_path / "f2" / name).read_bytes()
    assert (tmp_path / "X1.csv").read_bytes() == (tmp_path / "X2.csv").read_bytes()


def test_unknown_method_is_usage_error(data_dir, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--method", "kmeans", "--data", str(data_dir), "--out", str(tmp_path)])
    assert exc.value.code == 2
    assert main(["fit", "--fit.method", "kmeans", "--data", str(data_dir), "--out", str(tmp_path)]) == 2


def test_bad_config_value_exit_2(tmp_path):
    assert main(["evaluate", "--run.repetitions", "zero"]) == 2
    cfg = tmp_path / "c.txt"
    cfg.write_text("learn.kernel = linear\n")
    assert main(["evaluate", "--config", str(cfg)]) == 2


def test_train_row_mismatch_names_counts(tmp_path, capsys):
    X = tmp_path / "X.csv"
    np.savetxt(X, np.ones((4, 2)), delimiter=",")
    y = tmp_path / "y.txt"
    y.write_text("a\nb\na\n")
    assert main(["train", "--features", str(X), "--labels", str(y)]) == 1
    err = capsys.readouterr().err
    assert "4 rows" in err and "3 labels" in err


def test_bottleneck_command(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("0,2\n")
    b.write_text("0.5,2\n")
    assert main(["bottleneck", str(a), str(b)]) == 0
    assert capsys.readouterr().out.strip() == "0.5"
    b.write_text("# header\n0,1\n3,2\n")
    assert main(["bottleneck", str(a), str(b)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_missing_file_is_runtime_error(tmp_path):
    assert main(["bottleneck", str(tmp_path / "nope.csv"), str(tmp_path / "nope.csv")]) == 1


def test_console_entry_point(tmp_path):
    a = tmp_path / "a.csv"
    a.write_text("0,2\n")
    res = subprocess.run([sys.executable, "-m", "adaptive_templates.cli", "bottleneck", str(a), str(a)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.0"
    assert "# resolved configuration" in res.stderr


def test_reproduce_manifolds_shape(tmp_path):
    out = tmp_path / "r"
    rc = main(["reproduce-manifolds", "--data.sizes", "4,6", *SMALL, "--data.manifolds", "annulus,cube,torus",
               "--run.repetitions", "2", "--run.output", str(out)])
    assert rc == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0] == "method,kernel,n_samples,train_mean,train_std,test_mean,test_std"
    assert [l.split(",")[2] for l in lines[1:]] == ["4", "6"]
    assert (out / "results.md").exists() and (out / "config.txt").exists()
    assert (out / "size_6" / "rep_1" / "fit_report.txt").exists()
