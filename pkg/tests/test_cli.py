import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from fitchain.cli import run

FIVE = {"k": 2, "lengths": [2, 1, 2], "weights": ["1/2", "1/2"], "epsilon": "1/10"}


@pytest.fixture
def five(tmp_path):
    path = tmp_path / "five.json"
    path.write_text(json.dumps(FIVE))
    return path


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_validate(five, capsys):
    assert run(["validate", str(five)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_states"] == 5
    assert doc["epsilon"] == "1/10"


def test_curve_t_max_zero(five, capsys):
    assert run(["curve", str(five), "--t-max", "0"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 1
    assert float(rows[0]["t"]) == 0


def test_curve_is_deterministic(five, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["curve", str(five), "--t-max", "30", "--out", str(a)]) == 0
    assert run(["--threads", "1", "curve", str(five), "--t-max", "30", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"k": 1, "lengths": [2, 1], "weights": [1], "epsilon": 0.1}))
    assert run(["validate", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "BranchCountTooSmall"


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["curve", str(bad)]) == 2
    assert "error" in json.loads(capsys.readouterr().err)


def test_missing_file(tmp_path, capsys):
    assert run(["curve", str(tmp_path / "nope.json")]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "IOError"


def test_oracle_too_large(tmp_path, capsys):
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"k": 2, "lengths": [20, 5, 12], "weights": ["1/2", "1/2"], "epsilon": "1/10"}))
    assert run(["oracle", str(big), "--t-max", "5"]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "TooLarge"


def test_oracle_output(five, capsys):
    assert run(["oracle", str(five), "--t-max", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pi"][-1] == "27702/31891"
    assert len(doc["curve"]) == 4


def test_hitting(five, capsys):
    assert run(["hitting", str(five), "--start", "x0", "--horizon", "200"]) == 0
    doc = json.loads(capsys.readouterr().out)
    total = sum(p for _, p in doc["pmf"]) + doc["tail_mass"]
    assert total == pytest.approx(1, abs=1e-12)
    assert doc["pmf"][0][0] == 3


def test_unknown_start(five, capsys):
    assert run(["hitting", str(five), "--start", "y9^4"]) == 2


def test_ct_curve(five, capsys):
    assert run(["ct-curve", str(five), "--times", "0,3"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert list(rows[0]) == ["t_real", "d_ct", "tol"]
    assert float(rows[0]["d_ct"]) > float(rows[1]["d_ct"])


def test_poisson(capsys):
    assert run(["poisson", "100"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["left"] <= 30 and doc["right"] >= 170


def test_fit_profile_roundtrip(tmp_path, capsys):
    prof = tmp_path / "linear.csv"
    prof.write_text("c,p\n-1,1\n1,0\n")
    params = tmp_path / "params.json"
    assert run(["fit-profile", str(prof), "--t-n", "100", "--w-n", "4", "--n", "8", "--out", str(params)]) == 0
    doc = json.loads(params.read_text())
    assert doc["meta"]["t_n"] == 100
    curve = tmp_path / "curve.csv"
    assert run(["curve", str(params), "--mode", "root", "--out", str(curve)]) == 0
    rows = _rows(curve.read_text())
    t = np.array([float(r["t"]) for r in rows])
    d = np.array([float(r["d"]) for r in rows])
    c = (t - 100) / 4
    target = np.clip((1 - c) / 2, 0, 1)
    inside = np.abs(c) <= 1
    assert np.abs(d - target)[inside].max() <= 0.1


def test_gallery(capsys):
    assert run(["gallery", "uncountable", "--n", "2000", "--c=-1,1", "--alpha", "0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["name"] == "uncountable"


def test_gallery_k_too_small(capsys):
    assert run(["gallery", "uncountable", "--n", "100"]) == 2


def test_module_entry_point(five):
    out = subprocess.run(
        [sys.executable, "-m", "fitchain", "validate", str(five)], capture_output=True, text=True
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["k"] == 2
