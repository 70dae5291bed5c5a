from __future__ import annotations

import json

import pytest

from citsgraph.bundled import (
    bundled_environment_bytes,
    bundled_kb_bytes,
    bundled_scenario_bytes,
)
from citsgraph.cli import main


@pytest.fixture()
def paths(tmp_path):
    env = tmp_path / "env.json"
    kb = tmp_path / "kb.json"
    scenario = tmp_path / "scenario.json"
    env.write_bytes(bundled_environment_bytes())
    kb.write_bytes(bundled_kb_bytes())
    scenario.write_bytes(bundled_scenario_bytes())
    return {"env": str(env), "kb": str(kb), "scenario": str(scenario), "dir": tmp_path}


def test_validate_env_ok(paths, capsys):
    assert main(["validate-env", "--env", paths["env"]]) == 0
    assert "environment valid" in capsys.readouterr().out


def test_validate_env_empty_file(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert main(["validate-env", "--env", str(empty)]) == 2


def test_validate_env_dangling_road(paths, tmp_path, capsys):
    doc = json.loads(bundled_environment_bytes())
    doc["obus"][0]["Loc_Road"] = "Road_9"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc, ensure_ascii=False))
    assert main(["validate-env", "--env", str(bad)]) == 1
    out = capsys.readouterr().out
    assert out.count("error:") == 1
    assert "Road_9" in out


def test_validate_scenario_ok(paths, capsys):
    code = main(
        [
            "validate-scenario",
            "--env", paths["env"],
            "--kb", paths["kb"],
            "--scenario", paths["scenario"],
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert out.count("[ok]") == 5
    assert "verdict: valid" in out


def test_validate_scenario_usb_mutation(paths, tmp_path, capsys):
    doc = json.loads(bundled_environment_bytes())
    for obu in doc["obus"]:
        if obu["id"] == "OBU_Vehicle_attacker":
            obu["System_Env"] = [t for t in obu["System_Env"] if t != "USB"]
    mutated = tmp_path / "mutated.json"
    mutated.write_text(json.dumps(doc, ensure_ascii=False))
    code = main(
        [
            "validate-scenario",
            "--env", str(mutated),
            "--kb", paths["kb"],
            "--scenario", paths["scenario"],
        ]
    )
    assert code == 1
    assert "step-1" in capsys.readouterr().out


def test_validate_scenario_unknown_cve(paths, tmp_path):
    doc = json.loads(bundled_scenario_bytes())
    doc["steps"][0]["cves"] = ["CVE-1999-0001"]
    bad = tmp_path / "bad_scenario.json"
    bad.write_text(json.dumps(doc, ensure_ascii=False))
    code = main(
        [
            "validate-scenario",
            "--env", paths["env"],
            "--kb", paths["kb"],
            "--scenario", str(bad),
        ]
    )
    assert code == 2


def _plan_args(paths, **extra):
    args = [
        "plan",
        "--env", paths["env"],
        "--kb", paths["kb"],
        "--library", paths["scenario"],
        "--goal", "fact:misinformation_delivered:RSU_Streetlamp",
    ]
    for key, value in extra.items():
        args += [f"--{key.replace('_', '-')}", str(value)]
    return args


def test_plan_dot_export(paths, tmp_path):
    out = tmp_path / "graph.dot"
    assert main(_plan_args(paths, format="dot", output=out)) == 0
    dot = out.read_text()
    assert dot.count("->") == 5
    assert len([l for l in dot.splitlines() if l.strip().startswith("s") and "[" in l]) >= 6


def test_plan_goal_already_satisfied(paths, tmp_path):
    out = tmp_path / "graph.json"
    args = [
        "plan",
        "--env", paths["env"],
        "--kb", paths["kb"],
        "--library", paths["scenario"],
        "--goal", json.dumps(
            {"kind": "has_system_env", "args": ["OBU_Vehicle_attacker", "USB"]}
        ),
        "--format", "json",
        "--output", str(out),
    ]
    assert main(args) == 0
    doc = json.loads(out.read_text())
    assert len(doc["nodes"]) == 1
    assert doc["nodes"][0]["goal"]


def test_plan_unreachable_at_depth_2(paths, tmp_path):
    out = tmp_path / "graph.dot"
    assert main(_plan_args(paths, format="dot", output=out, max_depth=2)) == 3


def test_plan_runs_are_byte_identical(paths, tmp_path):
    out1 = tmp_path / "a.dot"
    out2 = tmp_path / "b.dot"
    assert main(_plan_args(paths, format="dot", output=out1)) == 0
    assert main(_plan_args(paths, format="dot", output=out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()
    js1 = tmp_path / "a.json"
    js2 = tmp_path / "b.json"
    assert main(_plan_args(paths, format="json", output=js1)) == 0
    assert main(_plan_args(paths, format="json", output=js2)) == 0
    assert js1.read_bytes() == js2.read_bytes()


def test_kb_tactic_listing(paths, capsys):
    assert main(["kb", "--kb", paths["kb"], "--tactic", "Impact"]) == 0
    out = capsys.readouterr().out
    assert "Service Stop" in out
    assert "Data Manipulation" in out


def test_kb_target_listing(paths, capsys):
    assert main(["kb", "--kb", paths["kb"], "--target", "OBU"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l]
    assert len(lines) == 5


def test_kb_unknown_tactic(paths):
    assert main(["kb", "--kb", paths["kb"], "--tactic", "Persistence"]) == 2


def test_kb_summary(paths, capsys):
    assert main(["kb", "--kb", paths["kb"]]) == 0
    out = capsys.readouterr().out
    assert "tactics: 11" in out and "techniques: 21" in out and "cves: 26" in out
