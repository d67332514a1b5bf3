"""End-to-end checks of the hspw_lab binary: exit codes, values, schema, CSV."""

import csv
import json
import os
import subprocess
from pathlib import Path

import jsonschema
import pytest

LAB = os.environ.get("HSPW_LAB", "build/tools/hspw_lab")
SCHEMA = json.loads((Path(__file__).resolve().parents[2] / "schema" / "report.schema.json").read_text())

UNIT = '{"type":"interval","lo":0,"hi":1}'
PLANE = '{"type":"halfspace_product","d":1,"r":1,"truncation":{"lo":[-4,0],"hi":[4,8]}}'
FACTORS = '["polybump:-0.25,0.25","polybump:0.5,1"]'


def lab(*args, env=None):
    proc = subprocess.run([LAB, *args], capture_output=True, text=True, env=env)
    report = json.loads(proc.stdout)
    jsonschema.validate(report, SCHEMA)
    assert report["exit_code"] == proc.returncode
    return proc.returncode, report, proc.stderr


def test_verify_closed_form():
    code, rep, _ = lab("hspw-verify", "--domain", UNIT, "--field", "poly:t*(1-t)", "--alpha", "0", "--p", "2")
    assert code == 0
    r = rep["result"]["reports"][0]
    assert r["pass"] and r["status"] == "ok"
    assert r["ratio"] == pytest.approx(7**0.5 / 2, rel=1e-9)
    assert r["K"] == 2.0
    # defaults are echoed
    assert rep["config"]["quadrature"]["rel_tol"] == 1e-8
    assert rep["config"]["seed"] == 1


def test_exponents_sobolev():
    code, rep, _ = lab("exponents", "--n", "3", "--p", "2", "--a", "0", "--h", "0", "--solve", "q")
    assert code == 0
    assert rep["result"]["solved_for"] == "q"
    assert rep["result"]["value"] == pytest.approx(6.0, abs=1e-14)


def test_zero_norm():
    code, rep, _ = lab("norm", "--domain", UNIT, "--field", "zero")
    assert code == 0
    assert rep["result"]["value"] == 0.0


def test_exponents_no_solution_is_usage():
    code, rep, _ = lab("exponents", "--n", "1", "--p", "2", "--solve", "q")
    assert code == 1
    assert rep["error"]["code"] == "NoSolution"


def test_usage_error_names_the_path():
    code, rep, err = lab("norm", "--domain", '{"type":"ball","center":[0,0]}', "--field", "zero")
    assert code == 1
    assert rep["error"]["path"] == "/domain/radius"
    assert "/domain/radius" in err
    code, rep, _ = lab("norm", "--domain", UNIT, "--field", "zero", "--quadrature", '{"rel_tol":-1}')
    assert code == 1 and rep["error"]["path"] == "/quadrature"
    code, rep, _ = lab("norm", "--domain", UNIT, "--field", "nonsense:1")
    assert code == 1 and rep["error"]["path"] == "/field"


def test_divergent_side_exits_3():
    # constant u: the Hardy side diverges at alpha = 0.5
    code, rep, _ = lab("hspw-verify", "--domain", UNIT, "--field", "poly:1", "--alpha", "0.5", "--p", "2")
    assert code == 3
    assert rep["result"]["reports"][0]["status"] == "lhs_divergent"


def test_infeasible_family_exits_3():
    code, rep, _ = lab("sharpness", "--domain", UNIT, "--family", "constant", "--budget", "10")
    assert code == 3 and rep["error"]["code"] == "InfeasibleFamily"


def test_p_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    code, rep, _ = lab("--csv", str(out), "hspw-verify", "--domain", UNIT, "--field", "poly:t*(1-t)",
                       "--p", "[4,1.5,2,3,2.5,1.75,3.5,1.25,2.25,5]")
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["p", "alpha", "n", "lhs", "rhs", "K", "ratio", "slack", "pass"]
    ps = [float(r[0]) for r in rows[1:]]
    assert len(ps) == 10 and ps == sorted(ps)
    # floats carry 17 significant digits
    assert rows[2][3] == "0.76376261582597327" or len(rows[2][3].replace(".", "").lstrip("0")) >= 15


def test_p_range():
    code, rep, _ = lab("hspw-verify", "--domain", UNIT, "--field", "poly:t*(1-t)", "--p-range", "1.5:4:6")
    assert code == 0
    assert [r["p"] for r in rep["result"]["reports"]] == [1.5, 2.0, 2.5, 3.0, 3.5, 4.0]


def test_sharpness_reaches_two(tmp_path):
    out = tmp_path / "trace.csv"
    code, rep, _ = lab("--csv", str(out), "sharpness", "--domain", '{"type":"interval","lo":0,"hi":200}')
    assert code == 0
    assert 1.9 <= rep["result"]["best_ratio"] <= 2.0
    assert len(list(csv.reader(out.open()))) == rep["result"]["evaluations"] + 1


def test_gls_theorem_check():
    code, rep, _ = lab("gls-norm", "--domain", UNIT, "--field", "poly:t*(1-t)", "--psi", "logcorr:2,1",
                       "--check-theorem", "true")
    assert code == 0
    assert rep["result"]["theorem"]["pass"] and rep["result"]["theorem"]["certificate_pass"]


def test_dilation_probe():
    code, rep, _ = lab("dilation", "--domain", PLANE, "--factors", FACTORS, "--probe", "true")
    assert code == 0
    n = rep["result"]["necessity"]
    assert n["residual"] == -1.0
    assert n["ratio_slope"] == pytest.approx(-1.0, abs=1e-6)
    assert not n["consistent"]


def test_config_file_and_batch(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "command": "report",
        "runs": [
            {"command": "exponents", "n": 3, "solve": "q"},
            {"command": "hspw-verify", "domain": json.loads(UNIT), "field": "poly:1", "alpha": 0.5},
            {"command": "norm", "domain": json.loads(UNIT), "field": "zero"},
        ],
    }))
    code, rep, _ = lab("--config", str(cfg))
    assert code == 3
    assert [r["exit_code"] for r in rep["result"]["runs"]] == [0, 3, 0]


def test_unknown_option_key(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "norm", "domain": json.loads(UNIT), "field": "zero", "colour": 1}))
    code, rep, _ = lab("--config", str(cfg))
    assert code == 1 and rep["error"]["path"] == "/colour"


def test_empty_table_refused(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "report", "runs": [{"command": "exponents", "n": 3, "solve": "q"}]}))
    proc = subprocess.run([LAB, "--config", str(cfg), "--csv", str(tmp_path / "x.csv")], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "empty table" in proc.stderr
    assert not (tmp_path / "x.csv").exists()


def test_reports_do_not_depend_on_thread_count(tmp_path):
    cfg = tmp_path / "run.json"
    square = {"type": "box", "lo": [0, 0], "hi": [1, 1]}
    disk = {"type": "ball", "center": [0, 0], "radius": 1}
    cfg.write_text(json.dumps({
        "command": "report",
        "runs": [
            {"command": "hspw-verify", "domain": square, "field": "bump", "alpha": 0.5, "p": [2, 4]},
            {"command": "hspw-verify", "domain": disk, "field": "power:2", "alpha": 1.5, "p": [1.5, 2, 4]},
            {"command": "gls-norm", "domain": square, "field": "power:2", "alpha": 0.5, "grid_count": 6,
             "check_theorem": True},
            {"command": "sharpness", "domain": {"type": "interval", "lo": 0, "hi": 200}, "budget": 60, "seed": 7},
        ],
    }))
    outputs = []
    for threads in ("1", "8"):
        env = dict(os.environ, HSPW_LAB_THREADS=threads)
        out = tmp_path / f"report{threads}.json"
        csv_out = tmp_path / f"rows{threads}.csv"
        proc = subprocess.run([LAB, "--config", str(cfg), "--out", str(out)], env=env, capture_output=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
        single = subprocess.run([LAB, "--csv", str(csv_out), "hspw-verify", "--domain", json.dumps(disk), "--field",
                                 "bump", "--p-range", "2:4:3", "--alpha", "0.5"], env=env, capture_output=True)
        assert single.returncode == 0
        outputs.append(csv_out.read_bytes())
    assert outputs[0] == outputs[2]
    assert outputs[1] == outputs[3]
