import csv
import json
import math

import numpy as np
import pytest

from billiard_caustics.caustics import tangency_lambda
from billiard_caustics.cli import dumps, main

ELLIPSE_SPEC = {"type": "perturbed_ellipse", "a": 2.0, "b": 1.0, "eps": 0.0, "mu1": {"cos": [1.0]}}


@pytest.fixture
def spec(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(ELLIPSE_SPEC))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_resonant(capsys):
    code, out, _ = run(capsys, "resonant", "--a", "2", "--b", "1", "--m", "1", "--n", "3", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["rho_residual"] <= 1e-12
    assert {"lambda", "k", "delta", "K"} <= set(rep)
    assert '"lambda": 0.99131843766616157' in out  # 17 significant digits


def test_melnikov_csv_and_classify(capsys, spec):
    code, out, _ = run(capsys, "melnikov", "--table", spec, "--m", "1", "--n", "4", "--grid", "256", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["phi", "L1"] and len(rows) == 257
    values = np.array([float(r[1]) for r in rows[1:]])
    assert np.ptp(values) < 1e-10
    code, out, _ = run(capsys, "classify", "--table", spec, "--m", "1", "--n", "4", "--grid", "256")
    rep = json.loads(out)
    assert rep["verdict"] == rep["predicted_verdict"] == "Constant" and rep["agree"] is True


def test_inline_table(capsys):
    code, out, _ = run(capsys, "classify", "--type", "perturbed_ellipse", "--a", "2", "--b", "1",
                       "--mu1-cos", "0", "1", "--m", "1", "--n", "4")
    assert code == 0 and json.loads(out)["verdict"] == "Nonconstant"
    code, out, _ = run(capsys, "classify", "--r0", "1", "--mu1-cos", "0", "0", "0", "0", "0", "1",
                       "--m", "1", "--n", "3")
    assert code == 0 and json.loads(out)["verdict"] == "Nonconstant"


def test_phase_portrait_integrable(capsys, spec):
    code, out, _ = run(capsys, "phase-portrait", "--table", spec, "--orbits", "20", "--steps", "500")
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["orbit", "step", "phi", "y"] and len(rows) == 1 + 20 * 501
    data = np.array(rows[1:], dtype=float)
    for i in range(20):
        o = data[data[:, 0] == i]
        phi, y = o[:, 2], o[:, 3]
        speed = np.hypot(2 * np.sin(phi), np.cos(phi))
        theta = np.arccos(y / speed)
        # confocal conic parameter of each outgoing chord is conserved
        lam = []
        for p, t in zip(phi, theta):
            tx, ty = -2 * math.sin(p) / math.hypot(2 * math.sin(p), math.cos(p)), math.cos(p) / math.hypot(2 * math.sin(p), math.cos(p))
            d = (math.cos(t) * tx - math.sin(t) * ty, math.cos(t) * ty + math.sin(t) * tx)
            lam.append(abs(tangency_lambda((2 * math.cos(p), math.sin(p)), d, 2.0, 1.0)))
        assert np.ptp(lam) < 1e-8


def test_poncelet_outputs(capsys):
    code, out, _ = run(capsys, "poncelet", "--a", "2", "--b", "1", "--m", "2", "--n", "5", "--phi0", "0.3")
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["j", "t_j", "phi_j", "x_j", "y_j"] and len(rows) == 7
    assert float(rows[-1][2]) - float(rows[1][2]) == pytest.approx(4 * math.pi, abs=1e-9)
    code, out, _ = run(capsys, "poncelet", "--a", "2", "--b", "1", "--m", "1", "--n", "3", "--format", "svg")
    assert code == 0 and out.startswith("<?xml") and "<ellipse" in out and out.count("<polygon") == 2
    code, out, _ = run(capsys, "poncelet", "--a", "2", "--b", "1", "--m", "1", "--n", "3", "--format", "json")
    assert json.loads(out)["closure_error"] < 1e-9


def test_persistence_json(capsys, spec):
    code, out, _ = run(capsys, "persistence", "--table", spec, "--m", "1", "--n", "3", "--grid", "16")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "consistent" and 0.7 <= rep["fitted_order"] <= 1.5


def test_orbit(capsys):
    code, out, _ = run(capsys, "orbit", "--a", "2", "--b", "1", "--steps", "10", "--theta0", "1.0")
    assert code == 0 and len(out.splitlines()) == 12


@pytest.mark.parametrize("argv", [
    ["resonant", "--a", "2", "--b", "1", "--m", "2", "--n", "4"],
    ["resonant", "--a", "1", "--b", "2", "--m", "1", "--n", "3"],
    ["resonant", "--a", "2", "--b", "1", "--m", "1"],
    ["resonant", "--table", "/does/not/exist.json", "--m", "1", "--n", "3"],
    ["melnikov", "--a", "2", "--b", "1", "--m", "1", "--n", "3"],
    ["melnikov", "--type", "perturbed_ellipse", "--a", "2", "--b", "1", "--m", "1", "--n", "3", "--grid", "8"],
    ["classify", "--type", "perturbed_ellipse", "--a", "2", "--b", "1", "--m", "1", "--n", "3", "--format", "csv"],
    ["nonsense"],
    ["resonant", "--m", "x"],
])
def test_bad_input_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    msg = json.loads(err)
    assert {"error", "message"} <= set(msg)


def test_bad_json_exit_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "resonant", "--table", str(path), "--m", "1", "--n", "3")
    assert code == 2 and json.loads(err)["error"] == "domain"


def test_numeric_failure_exit_1(capsys):
    # L1 of the (3, 7) caustic is not resolvable on the finest profile grid
    code, out, err = run(capsys, "persistence", "--type", "perturbed_ellipse", "--a", "2", "--b", "1",
                         "--mu1-cos", "1", "--m", "3", "--n", "7", "--grid", "16")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "convergence"


@pytest.mark.parametrize("argv", [
    ["resonant", "--a", "2", "--b", "1", "--m", "2", "--n", "5"],
    ["poncelet", "--a", "2", "--b", "1", "--m", "1", "--n", "4", "--format", "svg"],
    ["melnikov", "--type", "perturbed_ellipse", "--a", "2", "--b", "1", "--mu1-cos", "0", "1", "--m", "1", "--n", "3"],
    ["phase-portrait", "--type", "perturbed_ellipse", "--a", "2", "--b", "1", "--table-eps", "0.01",
     "--mu1-cos", "1", "--orbits", "3", "--steps", "40"],
])
def test_byte_identical(tmp_path, argv):
    outs = []
    for i in range(2):
        path = tmp_path / f"out{i}"
        assert main(argv + ["--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and len(outs[0]) > 0


def test_dumps():
    assert dumps({"a": 0.1, "b": [1, True, None, float("nan")]}) == '{"a": 0.10000000000000001, "b": [1, true, null, null]}\n'
