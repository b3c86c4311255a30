import json
import subprocess
import sys

import pytest

from corrbandit.cli import EXIT_CONFIG, EXIT_IO, EXIT_MODEL, main

EX2_DOC = {"outcomes": [[1], [2], [3]], "pmf": [0.3, 0.35, 0.35],
           "rewards": [[1, 2, 2], [1.5, 0, 1.5]]}


@pytest.fixture
def ex2_file(tmp_path):
    path = tmp_path / "ex2.json"
    path.write_text(json.dumps(EX2_DOC))
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_scenarios_listing(capsys):
    code, out, _ = run(["scenarios", "--format", "json"], capsys)
    assert code == 0
    doc = {s["name"]: s for s in json.loads(out)}
    assert len(doc) >= 6
    assert "lambda=0.5" in " ".join(doc["continuous-case2"]["params"]["arms"])
    assert doc["vector-case1"]["params"]["P_X2"] == [0.38, 0.22, 0.4]
    code, text, _ = run(["scenarios"], capsys)
    assert code == 0 and "discrete5-case1" in text


def test_inspect_example2_file(ex2_file, capsys):
    code, out, _ = run(["inspect", "--model", ex2_file, "--t-grid", "100,1000"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["k_star"] == 0 and rep["non_competitive"] == [1] and rep["competitive"] == []
    assert [row["T"] for row in rep["bounds"]] == [100, 1000]
    assert rep["lower_bound_rate"] == 0.0
    assert rep["means"] == pytest.approx([1.7, 0.975])


def test_inspect_csv(ex2_file, tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _, _ = run(["inspect", "--model", ex2_file, "--t-grid", "10,100,1000", "--format", "csv",
                      "--out", out], capsys)
    lines = out.read_text().splitlines()
    assert code == 0 and lines[0].startswith("T,total_regret") and len(lines) == 4


def test_inspect_single_arm(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"outcomes": [[0], [1]], "pmf": [0.5, 0.5], "rewards": [[1, 2]]}))
    code, out, _ = run(["inspect", "--model", path], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["competitive"] == [] and rep["non_competitive"] == []


def test_inspect_continuous_scenario(capsys):
    code, out, _ = run(["inspect", "--scenario", "continuous-case2", "--grid", "500"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["competitive"] == [1] and rep["non_competitive"] == [2]


def test_simulate_rows_and_determinism(ex2_file, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--model", ex2_file, "--T", 10, "--runs", 1, "--stride", 1, "--policies", "cucb"]
    assert run(args + ["--out", a], capsys)[0] == 0
    assert run(args + ["--out", b], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 11


def test_simulate_stdout_and_summary(capsys):
    code, out, err = run(["simulate", "--scenario", "example2", "--T", 200, "--runs", 3], capsys)
    assert code == 0
    assert out.startswith("policy,t,mean_regret")
    assert "cucb" in err and "ucb1" in err


def test_simulate_json(capsys):
    code, out, _ = run(["simulate", "--scenario", "example2", "--T", 50, "--runs", 2,
                        "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and set(doc) == {"cucb", "ucb1"} and doc["cucb"]["t"][-1] == 50


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "example2", "T": 30, "runs": 2, "policies": ["ucb1"],
                               "stride": 1}))
    code, out, _ = run(["simulate", "--config", cfg, "--T", 20], capsys)
    rows = out.splitlines()
    assert code == 0 and len(rows) == 21 and rows[-1].startswith("ucb1,20,")


def test_trace_jsonl(capsys):
    code, out, _ = run(["trace", "--scenario", "example2", "--T", 15, "--policies", "cucb"], capsys)
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(rows) == 15
    assert set(rows[0]) == {"policy", "round", "k_max", "removed", "indices", "chosen", "reward"}
    assert rows[0]["indices"] == [None, None]
    code2, out2, _ = run(["trace", "--scenario", "example2", "--T", 15, "--policies", "cucb"], capsys)
    assert out2 == out


@pytest.mark.parametrize("doc, field", [
    ({"outcomes": [[1], [2]], "pmf": [0.5, -0.5], "rewards": [[1, 2]]}, "pmf"),
    ({"outcomes": [[1], [2]], "pmf": [0.5, 0.5]}, "rewards"),
    ({"outcomes": [[1], [2]], "pmf": [0.5, 0.5], "rewards": [[1, 2, 3]]}, "rewards"),
    ({"outcomes": [[1], [2]], "pmf": ["a", 0.5], "rewards": [[1, 2]]}, "pmf"),
    ({"density": "gamma(2)", "arms": ["constant(1)"]}, "density"),
    ({"density": "beta(2,2)", "arms": ["cubic(1)"]}, "arms"),
])
def test_malformed_model_names_field(doc, field, tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "out.csv"
    code, _, err = run(["simulate", "--model", path, "--T", 10, "--runs", 1, "--out", out], capsys)
    assert code == EXIT_MODEL
    assert field in err
    assert not out.exists()
    assert sorted(p.name for p in tmp_path.iterdir()) == ["bad.json"]


def test_invalid_json_model(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["inspect", "--model", path], capsys)[0] == EXIT_MODEL


def test_config_errors(capsys, tmp_path):
    assert run(["simulate", "--scenario", "nope"], capsys)[0] == EXIT_CONFIG
    assert run(["simulate"], capsys)[0] == EXIT_CONFIG
    assert run(["simulate", "--scenario", "example2", "--T", 0], capsys)[0] == EXIT_CONFIG
    assert run(["simulate", "--scenario", "example2", "--policies", "greedy"], capsys)[0] == EXIT_CONFIG
    assert run(["simulate", "--scenario", "example2", "--policies", "fixed9"], capsys)[0] == EXIT_CONFIG
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(["simulate", "--config", cfg], capsys)[0] == EXIT_CONFIG


def test_discrete5_needs_rewards(tmp_path, capsys):
    code, _, err = run(["inspect", "--scenario", "discrete5-case1"], capsys)
    assert code == EXIT_MODEL and "reward table" in err
    table = tmp_path / "g.json"
    table.write_text(json.dumps([[0.1, 0.2, 0.3, 0.4, 0.5], [0.5, 0.4, 0.3, 0.2, 0.1],
                                 [0.2, 0.2, 0.2, 0.2, 0.2]]))
    code, out, _ = run(["inspect", "--scenario", "discrete5-case1", "--rewards", table], capsys)
    assert code == 0 and json.loads(out)["model"]["outcomes"] == 5


def test_io_error(capsys, tmp_path):
    missing = tmp_path / "no" / "such" / "dir" / "out.csv"
    code = run(["simulate", "--scenario", "example2", "--T", 5, "--runs", 1, "--out", missing], capsys)[0]
    assert code == EXIT_IO


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "corrbandit", "scenarios"], capture_output=True, text=True)
    assert proc.returncode == 0 and "example2" in proc.stdout
