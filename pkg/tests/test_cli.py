import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from mlrselect import phi, psi
from mlrselect.cli import main
from mlrselect.csvio import matrix_to_csv, parse_matrix, read_matrix
from mlrselect.errors import ParseError


def write_csv(path, m, header=None):
    path.write_text(matrix_to_csv(m, header), encoding="utf-8")
    return str(path)


@pytest.fixture
def chemometrics_shape(tmp_path):
    rng = np.random.default_rng(56)
    x = rng.normal(size=(56, 22))
    theta = np.zeros((22, 6))
    theta[[0, 4, 9]] = 2.0 * rng.normal(size=(3, 6))
    y = x @ theta + rng.normal(size=(56, 6))
    xh = [f"x{i}" for i in range(1, 23)]
    return write_csv(tmp_path / "x.csv", x, xh), write_csv(tmp_path / "y.csv", y)


def run_json(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None)


def test_select_report(chemometrics_shape, capsys):
    xp, yp = chemometrics_shape
    code, rep = run_json(["select", "--x", xp, "--y", yp, "--methods", "gkoo-a,koo-cp", "--rule", "sd:1"], capsys)
    assert code == 0
    assert (rep["n"], rep["p"], rep["k"]) == (56, 6, 22)
    assert rep["alpha_k"] == pytest.approx(22 / 56)
    g = rep["results"]["gkoo-a"]
    assert len(g["stats"]) == 22 and g["rule"] == "sd:1.0"
    assert all(1 <= i <= 22 for i in g["selected"]) and len(g["selected"]) <= 22
    assert {1, 5, 10} <= set(g["selected"])
    assert rep["results"]["koo-cp"]["threshold"] == 0.0
    assert rep["manifest"]["command"] == "select"
    assert rep["manifest"]["inputs"] == [xp, yp]


@pytest.mark.slow
def test_select_exhaustive_at_k22(chemometrics_shape, capsys):
    xp, yp = chemometrics_shape
    code, rep = run_json(["select", "--x", xp, "--y", yp, "--methods", "exhaustive-aic"], capsys)
    assert code == 0
    res = rep["results"]["exhaustive-aic"]
    assert res["subsets_evaluated"] == 2 ** 22 - 1
    assert {1, 5, 10} <= set(res["selected"])


def test_select_row_mismatch(tmp_path, capsys):
    rng = np.random.default_rng(0)
    xp = write_csv(tmp_path / "x.csv", rng.normal(size=(56, 4)))
    yp = write_csv(tmp_path / "y.csv", rng.normal(size=(55, 2)))
    assert main(["select", "--x", xp, "--y", yp]) == 2
    assert "55" in capsys.readouterr().err


def test_select_regime_error_exits_3(tmp_path, capsys):
    rng = np.random.default_rng(0)
    xp = write_csv(tmp_path / "x.csv", rng.normal(size=(12, 6)))
    yp = write_csv(tmp_path / "y.csv", rng.normal(size=(12, 6)))
    assert main(["select", "--x", xp, "--y", yp]) == 3
    assert "n - k > p" in capsys.readouterr().err


def test_select_parse_error_location(tmp_path, capsys):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n\n3,oops\n", encoding="utf-8")
    yp = write_csv(tmp_path / "y.csv", np.ones((3, 1)))
    assert main(["select", "--x", str(tmp_path / "x.csv"), "--y", yp]) == 2
    assert "row 4, column 2" in capsys.readouterr().err


def test_parse_matrix_details():
    m, header = parse_matrix("u,v\n1,2.5\n-3e2,4\n")
    assert header == ["u", "v"]
    np.testing.assert_array_equal(m, [[1, 2.5], [-300, 4]])
    m, header = parse_matrix("1,2\n3,4\n")
    assert header is None and m.shape == (2, 2)
    with pytest.raises(ParseError) as err:
        parse_matrix("1,2\n3\n")
    assert err.value.row == 2
    with pytest.raises(ParseError) as err:
        parse_matrix("1,2\n3,inf\n")
    assert (err.value.row, err.value.column) == (2, 2)


def test_csv_round_trip_is_exact(tmp_path):
    m = np.random.default_rng(4).normal(size=(7, 3)) * 10.0 ** np.arange(-5, 16, 7)
    p = write_csv(tmp_path / "m.csv", m, ["a", "b,c", 'd"e'])
    np.testing.assert_array_equal(read_matrix(p), m)
    assert b"\r" not in (tmp_path / "m.csv").read_bytes()


SIM = ["simulate", "--setting", "I", "--dist", "normal", "--n", "300", "--c", "0.2",
       "--alpha", "0.1", "--reps", "20", "--seed", "7"]


def test_simulate_fractions_and_determinism(tmp_path):
    # the manifest echoes --out, so every run writes to the same path
    out = tmp_path / "r.json"
    outs = []
    for threads in ["1", "1", "4", "8"]:
        assert main(SIM + ["--threads", threads, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert len(set(outs)) == 1
    rep = json.loads(outs[0])
    for name in ("koo-aic", "koo-bic", "koo-cp", "gkoo-a[sd:2.0]", "gkoo-c[sd:2.0]"):
        total = sum(rep[f"{name}.fraction_{b}"] for b in ("under", "exact", "over"))
        assert total == pytest.approx(1.0, abs=1e-12)
    assert rep["manifest.seed"] == 7


def test_simulate_csv_with_sidecar(tmp_path):
    out = tmp_path / "r.csv"
    assert main(SIM + ["--reps", "3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open(newline="")))
    assert [r["method"] for r in rows] == ["koo-aic", "koo-bic", "koo-cp", "gkoo-a", "gkoo-c"]
    side = json.loads((tmp_path / "r.csv.manifest.json").read_text())
    assert side["manifest"]["command"] == "simulate"


def test_simulate_thread_env_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("MLRSELECT_THREADS", "2")
    out = tmp_path / "r.json"
    assert main(SIM + ["--reps", "6", "--threads", "8", "--out", str(out)]) == 0
    capped = out.read_bytes()
    monkeypatch.delenv("MLRSELECT_THREADS")
    assert main(SIM + ["--reps", "6", "--out", str(out)]) == 0
    assert out.read_bytes() == capped


def test_simulate_rejects_simplex_violation(capsys):
    argv = [a if a not in ("0.2", "0.1") else {"0.2": "0.6", "0.1": "0.5"}[a] for a in SIM]
    assert main(argv) == 3
    assert "alpha + c" in capsys.readouterr().err


def test_regions_grid(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["regions", "--grid", "3", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == "alpha,c,phi,psi"
    assert len(text.splitlines()) == 2
    assert main(["regions", "--grid", "10", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open(newline="")))
    assert len(rows) == 36
    row = next(r for r in rows if float(r["alpha"]) == 0.1 and float(r["c"]) == 0.2)
    assert float(row["phi"]) == phi(0.1, 0.2)
    assert float(row["psi"]) == psi(0.1, 0.2)
    assert main(["regions", "--grid", "1"]) == 2


def test_diagnose(tmp_path, capsys):
    code, rep = run_json(["diagnose", "--alpha", "0.1", "--c", "0.2"], capsys)
    assert code == 0
    assert rep["V1"] == pytest.approx(0.15, abs=0.005)
    assert rep["V2"] == pytest.approx(0.50, abs=0.005)
    assert rep["V3"] is None

    code, rep = run_json(["diagnose", "--alpha", "0.2", "--c", "0.6"], capsys)
    assert rep["verdicts"]["KOO-CP"] == "overspecified"
    assert rep["verdicts"]["KOO-AIC"] == "overspecified"

    code, rep = run_json(["diagnose", "--alpha", "0.2", "--c", "0.4"], capsys)
    assert rep["verdicts"]["KOO-CP"] == "indeterminate"

    nc = tmp_path / "nc.json"
    nc.write_text(json.dumps([{"log_tau": 0.8, "kappa": 1.6, "s": 1, "m": 0, "kick_one_out": True}]))
    code, rep = run_json(["diagnose", "--alpha", "0.1", "--c", "0.2", "--noncentrality", str(nc)], capsys)
    assert rep["verdicts"]["KOO-AIC"] == "consistent"
    assert rep["verdicts"]["KOO-BIC"] == "underspecified"
    assert rep["V4"] == pytest.approx(1.6 - 0.2 * 0.5 / 0.9)

    assert main(["diagnose", "--alpha", "0.5", "--c", "0.6"]) == 3


def test_usage_errors_exit_2(capsys):
    assert_exit = []
    for argv in (["frobnicate"], ["simulate", "--setting", "III", "--n", "3", "--c", ".1", "--alpha", ".1"]):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert_exit.append(e.value.code)
    assert assert_exit == [2, 2]


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.csv"
    proc = subprocess.run([sys.executable, "-m", "mlrselect", "regions", "--grid", "4", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 1 + 3
