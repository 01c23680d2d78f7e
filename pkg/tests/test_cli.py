import json
from pathlib import Path

import pytest

from topoplan.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture(scope="module")
def planned(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    assert main(["plan", str(SCENARIOS / "disk.json"), "--out", str(out), "--k", "800"]) == 0
    return out


def test_plan_writes_artifacts(planned):
    for name in ("result.json", "metrics.csv", "plan.svg"):
        assert (planned / name).stat().st_size > 0
    doc = json.loads((planned / "result.json").read_text())
    assert doc["scenario"]["schema_version"] == 1 and len(doc["classes"]) == 2


def test_plan_rrht(tmp_path, capsys):
    assert main(["plan", str(SCENARIOS / "disk.json"), "--algo", "rrht", "--iters", "300",
                 "--seed", "3", "--out", str(tmp_path)]) == 0
    assert "rrht:" in capsys.readouterr().out


def test_replan_exit_codes(planned, capsys):
    rc = main(["replan", str(planned / "result.json"), "--obstacle", str(SCENARIOS / "blocker_upper.json")])
    assert rc == 0 and "steering calls 0" in capsys.readouterr().out
    rc = main(["replan", str(planned / "result.json"), "--obstacle", str(SCENARIOS / "blocker_wall.json"),
               "--out", str(planned / "wall.json")])
    assert rc == 2
    assert json.loads((planned / "wall.json").read_text())["success"] is False


def test_gap(capsys):
    assert main(["gap", str(SCENARIOS / "disk.json")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split() == ["class", "planner", "oracle", "ratio"]
    assert len(lines) == 3 and all(float(line.split()[-1]) >= 1.0 - 1e-12 for line in lines[1:])


def test_render(planned):
    assert main(["render", str(planned / "result.json"), "--out", str(planned / "again.svg")]) == 0
    assert (planned / "again.svg").read_text().startswith("<svg")


def test_infeasible_exit_code(tmp_path):
    doc = json.loads((SCENARIOS / "disk.json").read_text())
    doc["planner"]["k"] = 300
    doc["termination"] = {"class_count": 3, "target_signature": None}
    path = tmp_path / "k3.json"
    path.write_text(json.dumps(doc))
    assert main(["plan", str(path), "--out", str(tmp_path)]) == 2


def test_errors_exit_one(tmp_path, capsys):
    assert main(["plan", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bounds": [0, 0, 1, 1], "start": {"x": 0.5, "y": 0.5},
                               "goal": {"center": [0.9, 0.9], "radius": 0.05}, "extra": 1}))
    assert main(["plan", str(bad)]) == 1
    assert "extra" in capsys.readouterr().err


def test_log_level_env(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("TOPOPLAN_LOG", "INFO")
    import logging
    logging.getLogger().handlers.clear()
    main(["plan", str(SCENARIOS / "disk.json"), "--k", "200", "--out", str(tmp_path)])
    assert "fmht" in capsys.readouterr().err
