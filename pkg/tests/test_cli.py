import json
import subprocess
import sys

import pytest

from qmeasure import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out


def _json(capsys, *argv):
    code, out = _run(capsys, *argv)
    assert code == 0, out.err
    return json.loads(out.out)


def test_pointer_optimize(capsys):
    rep = _json(capsys, "pointer", "optimize", "--target", "both")
    assert rep["x"]["eps"] == pytest.approx(0.604868, abs=1e-6)
    assert rep["x"]["sigma"] == pytest.approx(0.685340, abs=1e-6)
    assert rep["z"]["delta"] == pytest.approx(2.700790, abs=1e-6)
    assert rep["z"]["sigma"] == pytest.approx(1.540390, abs=1e-6)
    assert rep["product"] == pytest.approx(1.05569, abs=1e-5)


def test_pointer_naive(capsys):
    m = _json(capsys, "pointer", "naive")["minimum"]
    assert m["t_sigma"] == pytest.approx(2.51286, abs=1e-4)
    assert m["product"] == pytest.approx(4.43670, abs=1e-4)


def test_pointer_density_to_dir(capsys, tmp_path):
    _json(capsys, "--out", str(tmp_path), "pointer", "density", "--target", "x", "--grid", "50")
    lines = (tmp_path / "density_x.csv").read_text().splitlines()
    assert len(lines) >= 51 and "\r" not in (tmp_path / "density_x.csv").read_text()


def test_rf_example(capsys):
    rows = _json(capsys, "examples", "rf", "--t", "1")["rows"]
    assert rows[0]["delta_bound"] == pytest.approx(0.0593, abs=1e-4)


def test_chain_example(capsys):
    rows = _json(capsys, "examples", "chain", "--N", "4", "20", "--kind", "micro")["rows"]
    assert rows[0]["bound"] == pytest.approx(0.25)
    assert rows[1]["bound"] == pytest.approx(0.05)


def test_beamsplitter_example(capsys):
    row = _json(capsys, "examples", "beamsplitter", "--theta", "0.7", "--n-max", "20")["rows"][0]
    assert row["sigma_b"] ** 2 == pytest.approx(row["sigma_b2_closed_form"], abs=1e-6)
    assert row["product"] == pytest.approx(0.5, abs=1e-6)


def test_inject_fault_exit_code(capsys):
    code, out = _run(capsys, "bounds", "audit", "--inject-fault", "--trials", "5")
    assert code == 2
    assert "error" in out.err


def test_bad_arguments_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["pointer", "optimize", "--target", "y"])
    assert exc.value.code == 2
    capsys.readouterr()
    code, _ = _run(capsys, "lan", "run", "--trial-csv")
    assert code == 2


def test_same_seed_same_json(capsys):
    args = ("--seed", "11", "lan", "run", "--trials", "3000", "--mode", "exact")
    assert _run(capsys, *args)[1].out == _run(capsys, *args)[1].out
    other = _run(capsys, "--seed", "12", *args[2:])[1].out
    assert other != _run(capsys, *args)[1].out


def test_lan_run_mean(capsys):
    rep = _json(capsys, "--seed", "4", "lan", "run", "--trials", "100000")
    assert abs(rep["mean_n_risk"] - 3.96) <= 3 * rep["std_error"]


def test_out_dir_manifest(capsys, tmp_path):
    _json(capsys, "--out", str(tmp_path), "--seed", "5", "bounds", "audit", "--trials", "20")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    for name in manifest["outputs"]:
        assert (tmp_path / name).exists()
    assert "sharp_sweep.csv" in manifest["outputs"]
    assert manifest["seed"] == 5
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["audit"]["violations"] == []
    assert report["sharp_sweep"]["equality_ok"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qmeasure", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
