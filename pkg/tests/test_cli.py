import json
import subprocess
import sys

import pytest

from forktopo.cli import main

from conftest import THREE_CLUSTER_TRACE, GAP_TRACE

SCENARIO = {
    "seed": 42,
    "horizon": 30,
    "clusters": 4,
    "fork_prob": ["17/20", "1/10", "1/20"],
    "confirm_depth": 3,
    "transactions": [{"txn_id": 1, "parties": [{"cluster": 0, "proxy": 0}, {"cluster": 3, "proxy": 0}]}],
}


@pytest.fixture
def scenario_path(tmp_path):
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(SCENARIO))
    return p


@pytest.fixture
def gap_path(tmp_path):
    p = tmp_path / "gap.jsonl"
    p.write_text(GAP_TRACE)
    return p


def test_simulate_is_byte_identical(tmp_path, scenario_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["simulate", "--config", str(scenario_path), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(scenario_path), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    first = json.loads(a.read_text().splitlines()[0])
    assert first["event"] == "config" and first["seed"] == 42


def test_seed_override(tmp_path, scenario_path, monkeypatch):
    out = tmp_path / "t.jsonl"
    monkeypatch.setenv("FORKTOPO_SEED", "99")
    assert main(["simulate", "--config", str(scenario_path), "--out", str(out)]) == 0
    assert json.loads(out.read_text().splitlines()[0])["seed"] == 99


def test_bad_seed_override(tmp_path, scenario_path, monkeypatch):
    monkeypatch.setenv("FORKTOPO_SEED", "lots")
    assert main(["simulate", "--config", str(scenario_path), "--out", str(tmp_path / "t")]) == 1


def test_unreadable_config(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "t")]) == 1
    assert "nope.json" in capsys.readouterr().err


def test_invalid_scenario(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(dict(SCENARIO, fork_prob=["1/2", "1/4"])))
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "t")]) == 1


def test_usage_error_exits_1(capsys):
    with pytest.raises(SystemExit) as err:
        main(["analyze"])
    assert err.value.code == 1


def test_analyze_json(tmp_path, capsys):
    p = tmp_path / "three.jsonl"
    p.write_text(THREE_CLUSTER_TRACE)
    assert main(["analyze", "--trace", str(p), "--first-fork", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["fork_counts"] == [3, 2, None]
    assert data["bindings"][0]["d_f"][0] == [0, 1, "5/6"]


def test_analyze_text(gap_path, capsys):
    assert main(["analyze", "--trace", str(gap_path), "--at", "1"]) == 0
    out = capsys.readouterr().out
    assert "fork counts: [2, 2, 3]" in out
    assert "delta_f: 1/3" in out


def test_analyze_out_of_range(gap_path):
    assert main(["analyze", "--trace", str(gap_path), "--at", "8"]) == 1


def test_verify_lists_uncovered_triple(gap_path, capsys):
    assert main(["verify", "--trace", str(gap_path)]) == 0
    out = capsys.readouterr().out
    assert "uncovered_by_paper_proof: d(0,1)=1 > d(0,2)+d(2,1)=1/3+1/3" in out
    assert out.rstrip().endswith("PASS")


def test_verify_json(gap_path, capsys):
    assert main(["verify", "--trace", str(gap_path), "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["passed"] is True
    assert data["bindings"][0]["metrics"]["d_f"]["paper_proof_coverage"]["uncovered_by_paper_proof"] == 1


def test_verify_exits_2_on_violation(tmp_path, capsys):
    # two clusters first fork identically and diverge later: not discrete
    lines = [
        '{"event":"config","seed":0,"horizon":2,"clusters":2,"fork_prob":["1/2","1/4","1/4"],"confirm_depth":6,"transactions":[]}',
    ]
    for c in range(2):
        lines.append('{"t":1,"cluster":%d,"event":"extend","fork":0,"len":1}' % c)
        lines.append('{"t":1,"cluster":%d,"event":"spawn","fork":1,"parent":0}' % c)
    lines.append('{"t":2,"cluster":0,"event":"extend","fork":0,"len":2}')
    lines += ['{"t":2,"cluster":0,"event":"spawn","fork":%d,"parent":0}' % k for k in (2, 3)]
    lines.append('{"t":2,"cluster":1,"event":"extend","fork":0,"len":2}')
    lines += ['{"t":2,"cluster":1,"event":"spawn","fork":%d,"parent":0}' % k for k in (2, 3, 4)]
    p = tmp_path / "nd.jsonl"
    p.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--trace", str(p)]) == 2
    out = capsys.readouterr().out
    assert "not separated: d(0,1)=1/4 <= epsilon=1/3" in out


def test_outcome(tmp_path, capsys):
    from conftest import refork_trace

    p = tmp_path / "r.jsonl"
    p.write_text(refork_trace(7))
    assert main(["outcome", "--trace", str(p), "--txn", "5", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["outcome"] == "commit" and data["stable"] is True and data["first_decided_step"] == 6


def test_outcome_missing_txn(gap_path):
    assert main(["outcome", "--trace", str(gap_path), "--txn", "3"]) == 1


def test_module_entry_point(gap_path):
    proc = subprocess.run([sys.executable, "-m", "forktopo", "verify", "--trace", str(gap_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
