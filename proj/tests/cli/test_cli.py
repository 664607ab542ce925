import json
import os
import subprocess

import pytest

CLI = os.environ["POMDPGEO_CLI"]
FIXTURES = os.environ["POMDPGEO_FIXTURES"]


def fx(name):
    return os.path.join(FIXTURES, name)


def run(*args):
    p = subprocess.run([CLI, *args], capture_output=True, text=True)
    return p.returncode, p.stdout


def run_json(*args):
    code, out = run(*args)
    return code, json.loads(out)


def test_freq_uniform_sums_to_one():
    code, out = run_json("freq", "--policy", "uniform", fx("fig1.json"))
    assert code == 0
    assert abs(sum(map(sum, out["eta"])) - 1) <= 1e-10


def test_freq_deterministic_policy():
    code, out = run_json("freq", "--policy", "det:a1,a1", fx("fig1.json"))
    assert code == 0
    assert out["eta"] == [[0.75, 0], [0.25, 0]]


def test_freq_csv():
    code, out = run("freq", "--csv", fx("fig1.json"))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "state,action,eta"
    assert len(lines) == 5


def test_constraint_degrees():
    code, out = run_json("constraints", fx("fig1.json"))
    assert code == 0
    degrees = {(c["action"], c["observation"]): c["degree"] for c in out["constraints"]}
    assert degrees == {("a1", "o1"): 1, ("a2", "o1"): 1, ("a1", "o2"): 2, ("a2", "o2"): 2}


def test_freq_output_is_feasible(tmp_path):
    for model in ("fig1.json", "appendixG3.json", "appendixE.json"):
        _, freq = run_json("freq", "--policy", "uniform", fx(model))
        path = tmp_path / "eta.json"
        path.write_text(json.dumps(freq))
        code, out = run_json("constraints", fx(model), "--eta", str(path))
        assert code == 0
        assert out["verdict"] == "feasible"


def test_faces():
    code, out = run_json("faces", fx("appendixG3.json"))
    assert code == 0
    assert out["f_vector"] == [8, 12, 6, 1]


def test_critical_runs_on_blind_fixture():
    code, out = run_json("critical", fx("appendixE.json"), "--mu", "s1", "--gamma", "0.9")
    assert code == 0
    assert out["grid_agrees"]
    assert {"roots", "boundary", "degenerate"} <= out.keys()


def test_bounds_inline():
    code, out = run_json("bounds", "--d", "2", "--k", "1", "--m", "1")
    assert code == 0
    assert out["bound"] == 2


def test_reward_conventions():
    _, norm = run_json("reward", fx("appendixG3.json"))
    _, raw = run_json("reward", "--unnormalized", fx("appendixG3.json"))
    assert raw["R"] * 0.5 == pytest.approx(norm["R"], rel=1e-12)


def test_oracle():
    code, out = run_json("oracle", fx("fig1.json"), "--tol", "1e-12")
    assert code == 0
    assert out["terms"] == 41
    assert out["closed_form_gap"] <= 1e-10


def test_scan_csv():
    code, out = run("scan", fx("fig1.json"), "--axes", "a1@o1,a1@o2", "--grid", "5", "--csv")
    assert code == 0
    assert len(out.splitlines()) == 26


def test_project_is_deterministic():
    a = run("project", fx("appendixG3.json"), "--samples", "30", "--seed", "5", "--csv")
    b = run("project", fx("appendixG3.json"), "--samples", "30", "--seed", "5", "--csv")
    assert a == b
    assert a[1].splitlines()[0] == "x,y,z,tag,edge_id"


def test_numbers_use_17_digits():
    _, out = run("freq", "--policy", "uniform", fx("appendixG3.json"))
    assert any(len(tok.strip(",[] ").lstrip("-").replace(".", "").lstrip("0")) >= 16 for tok in out.split())


def test_invalid_gamma_exits_2():
    code, out = run_json("freq", fx("fig1.json"), "--gamma", "1.5")
    assert code == 2
    assert out["ok"] is False
    assert out["violations"][0]["path"] == "gamma"


def test_unknown_flag_rejected():
    code, out = run_json("freq", fx("fig1.json"), "--bogus")
    assert code == 2
    assert out["error"]["kind"] == "usage"


def test_missing_file_names_path():
    code, out = run_json("freq", "/nonexistent/model.json")
    assert code == 2
    assert out["error"]["kind"] == "parse"


def test_computational_error_exits_1():
    code, out = run_json("critical", fx("appendixE.json"), "--gamma", "1")
    assert code == 1
    assert out["error"]["kind"] == "unsupported"


def test_size_cap_exits_1():
    code, out = run_json("bounds", "--d", "60", "--k", "40", "--m", "1")
    assert code == 1
    assert out["error"]["kind"] == "size_cap"


def test_determinism_byte_identical():
    assert run("faces", fx("fig1.json"), "--seed", "3") == run("faces", fx("fig1.json"), "--seed", "3")
