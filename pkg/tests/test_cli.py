import csv
import json
import subprocess
import sys

import pytest

from secidx.cli import EXIT_INFEASIBLE, EXIT_PARSE, EXIT_VALIDATION, main

from conftest import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_index_exact_examples(capsys):
    assert run(capsys, "index-exact", DATA / "example1.json")[:2] == (0, "u1: inf\n")
    assert run(capsys, "index-exact", DATA / "example1_modified.json")[:2] == (0, "u1: 1 {u1}\n")
    code, out, _ = run(capsys, "index-exact", DATA / "platoon.json")
    assert code == 0 and out == "u1: 2 {u1,u2}\nu2: 2 {u1,u2}\n"


def test_index_exact_single_actuator_and_budget(capsys):
    assert run(capsys, "index-exact", DATA / "platoon.json", "--actuator", "u2")[1] == "u2: 2 {u1,u2}\n"
    assert run(capsys, "index-exact", DATA / "platoon.json", "--budget", "1")[1].startswith("u1: >=2")


def test_index_exact_needs_realization(capsys):
    code, _, err = run(capsys, "index-exact", DATA / "example3.json")
    assert code == EXIT_VALIDATION and "realization" in err


def test_index_robust_examples(capsys):
    assert run(capsys, "index-robust", DATA / "example4.json")[1].startswith("u1: 2")
    out = run(capsys, "index-robust", DATA / "example3.json")[1]
    assert out.splitlines()[0] == "u1: 3 {u1,u2,y1}  separator {x2,y1}"


def test_index_robust_ieee14(capsys):
    out = run(capsys, "index-robust", DATA / "ieee14.json")[1].splitlines()
    assert out[1].startswith("u2: 2 ") and out[2].startswith("u3: 6 ")


def test_dump_graph(capsys):
    code, out, _ = run(capsys, "dump-graph", DATA / "example4.json")
    assert code == 0 and out == "# flow network for u1\nu1 x1 inf\nx1 x2 inf\nx2 t 1\n"
    out = run(capsys, "index-robust", DATA / "example4.json", "--dump-graph")[1]
    assert "x2 t 1" in out


def test_xset(capsys):
    assert run(capsys, "xset", DATA / "example4.json")[1] == "u1: {x1,x2}\n"
    assert run(capsys, "xset", DATA / "platoon.json")[1] == "u1: {x1}\nu2: {x2}\n"


def test_place(capsys):
    out = run(capsys, "place", DATA / "disjoint.json", DATA / "disjoint_request.json")[1]
    assert "sensors: 2" in out and "H(1)=1 " in out
    out = run(capsys, "place", DATA / "shared.json", DATA / "shared_protected_request.json")[1]
    assert "protected sensors: {x2}" in out and "actuators covered: 2 of 2" in out
    out = run(capsys, "place", DATA / "disjoint.json", DATA / "zero_request.json")[1]
    assert "sensors: 0" in out and "placement: {}" in out


def test_place_infeasible(capsys, tmp_path):
    req = tmp_path / "req.json"
    req.write_text(json.dumps({"k": {"0": 3}}))
    assert run(capsys, "place", DATA / "disjoint.json", req)[0] == EXIT_INFEASIBLE


def _max_residuals(capsys, scenario, tmp_path):
    code, out, _ = run(capsys, "simulate", DATA / scenario, "--json", "--out", tmp_path / "trace.csv")
    assert code == 0
    return {r["policy"]: r["max_residual"] for r in json.loads(out)["results"]}


def test_simulate_cases(capsys, tmp_path):
    r1 = _max_residuals(capsys, "case1.scenario.json", tmp_path)
    assert r1["type1"] <= 1e-9 and r1["type2"] <= 1e-9
    r2 = _max_residuals(capsys, "case2.scenario.json", tmp_path)
    assert r2["type1"] > 1e-3 and r2["type2"] <= 1e-9
    r3 = _max_residuals(capsys, "case3.scenario.json", tmp_path)
    assert r3["type2"] > 1e-3 and r3["type1"] <= 1e-9
    rows = list(csv.reader(open(tmp_path / "trace.type2.csv")))
    assert rows[0][0] == "k" and len(rows) == 51


def test_json_is_zero_based(capsys):
    data = json.loads(run(capsys, "index-robust", DATA / "example3.json", "--json")[1])
    first = data["results"][0]
    assert first["actuator"] == 0 and first["value"] == 3
    assert first["witness"] == {"actuators": [0, 1], "sensors": [0]}
    assert first["separator"] == {"states": [1], "sensors": [0]}
    assert data["results"][1]["value"] == "inf"
    assert len(data["input_sha256"]) == 64 and "elapsed_s" not in data


def test_reports_are_byte_identical(capsys):
    argv = ("index-exact", DATA / "platoon.json", "--json", "--seed", "4")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    argv = ("index-robust", DATA / "ieee14.json", "--jobs", "4")
    assert run(capsys, *argv)[1] == run(capsys, "index-robust", DATA / "ieee14.json")[1]


def test_seed_environment_override(capsys, monkeypatch):
    monkeypatch.setenv("SECIDX_SEED", "9")
    assert run(capsys, "index-exact", DATA / "example1.json")[0] == 0
    monkeypatch.setenv("SECIDX_SEED", "nine")
    assert run(capsys, "index-exact", DATA / "example1.json")[0] == EXIT_VALIDATION


def test_timing_flag(capsys):
    data = json.loads(run(capsys, "xset", DATA / "example4.json", "--json", "--timing")[1])
    assert data["elapsed_s"] >= 0


@pytest.mark.parametrize("argv", [["bogus"], ["xset"], ["xset", "missing.json"]])
def test_parse_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_PARSE


def test_bad_json_file(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{")
    assert run(capsys, "xset", path)[0] == EXIT_PARSE
    path.write_text(json.dumps({"n_x": 1, "actuators": [{"target": 0}, {"target": 0}], "a_pattern": []}))
    assert run(capsys, "xset", path)[0] == EXIT_VALIDATION


def test_bad_actuator(capsys):
    assert run(capsys, "xset", DATA / "platoon.json", "--actuator", "7")[0] == EXIT_VALIDATION


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "secidx", "xset", str(DATA / "platoon.json")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "u1: {x1}\nu2: {x2}\n"
