import csv
import json

import numpy as np
import pytest

from pairedmi.cli import main
from pairedmi.data import write_csv
from pairedmi.datagen import CovarianceSpec, ResidualLaw, generate


@pytest.fixture
def full_csv(tmp_path):
    s = generate(40, ResidualLaw("normal"), CovarianceSpec("sigma1", 0.4), 0.3, np.random.default_rng(3))
    path = tmp_path / "full.csv"
    write_csv(s.x, path, ["x1", "x2"])
    return path


@pytest.fixture
def data_csv(tmp_path):
    s = generate(40, ResidualLaw("normal"), CovarianceSpec("sigma1", 0.4), 0.3, np.random.default_rng(1))
    x = np.array(s.x)
    x[:6, 0] = np.nan
    x[6:12, 1] = np.nan
    z = np.random.default_rng(2).normal(size=(40, 1))
    path = tmp_path / "data.csv"
    write_csv(np.hstack([x, z]), path, ["x1", "x2", "z"])
    return path


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err


def test_no_subcommand_and_bad_flag(capsys):
    assert main([]) == 1
    assert main(["test"]) == 1
    assert main(["--threads", "0", "simulate", "x.json"]) == 1


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_simulate_deterministic(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "missing.json").write_text(json.dumps({"rhos": [0.1], "methods": ["tml", "norm"],
                                                       "n_sim": 10, "B": 99}))
    assert main(["simulate", "missing.json", "--seed", "7", "--out", "a.csv"]) == 0
    assert main(["--seed", "7", "simulate", "missing.json", "--out", "b.csv"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / ".pairedmi-cache").is_dir()


def test_simulate_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rhos": [0.1], "nsim": 3}))
    assert main(["simulate", str(bad), "--no-cache", "--out", str(tmp_path / "o.csv")]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"sizes": [[1, 10, 10]], "methods": ["tml"], "n_sim": 10}))
    assert main(["simulate", str(broken), "--no-cache", "--out", str(tmp_path / "o.csv")]) == 2
    assert main(["simulate", str(tmp_path / "nope.json")]) == 1


def test_test_command_rows(full_csv, data_csv, tmp_path, capsys):
    out = tmp_path / "p.csv"
    # injection needs a fully observed file
    assert main(["test", str(data_csv), "--inject", "0.2"]) == 1
    code = main(["test", str(full_csv), "--inject", "0.2", "--methods", "tml,norm", "--B", "199",
                 "--out", str(out)])
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["method"] for r in rows] == ["tml", "norm"]
    assert all(0 <= float(r["pvalue"]) <= 1 for r in rows)
    assert "tml" in capsys.readouterr().out


def test_test_command_with_aux(data_csv, tmp_path):
    out = tmp_path / "p.csv"
    assert main(["test", str(data_csv), "--aux", "z", "--methods", "pmm", "--out", str(out)]) == 0
    with open(out) as fh:
        assert [r["method"] for r in csv.DictReader(fh)] == ["pmm", "pmm+aux"]


def test_test_command_bad_column(data_csv):
    assert main(["test", str(data_csv), "--x1", "nope"]) == 1


def test_impute_command(data_csv, tmp_path):
    out = tmp_path / "imp"
    assert main(["impute", str(data_csv), "--method", "rfmi", "--m", "3", "--n-trees", "20",
                 "--aux", "z", "--seed", "5", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["method"] == "rfmi" and manifest["seed"] == 5
    assert manifest["params"]["forest"]["n_trees"] == 20
    assert len(manifest["files"]) == 3 and len(manifest["delta_trace"]) == 3
    with open(out / "imputed_1.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x1", "x2", "z"] and len(rows) == 41
    assert all(cell != "" for row in rows for cell in row)


def test_impute_deterministic(data_csv, tmp_path):
    for name in ("a", "b"):
        assert main(["impute", str(data_csv), "--method", "pmm", "--m", "2",
                     "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "imputed_2.csv").read_bytes() == (tmp_path / "b" / "imputed_2.csv").read_bytes()
    assert json.loads((tmp_path / "a" / "manifest.json").read_text())["delta_trace"] is None


def test_reproduce_command(tmp_path, capsys):
    out = tmp_path / "t2.csv"
    assert main(["reproduce", "table2", "--scale", "0.0002", "--no-cache", "--n-trees", "10",
                 "--B", "99", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 240 and {"reference", "flag"} <= set(rows[0])
    assert all(r["reference"] != "" for r in rows)
    text = capsys.readouterr().out
    assert "ref" in text and "published" in text
    assert main(["reproduce", "table7"]) == 1
