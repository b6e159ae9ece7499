"""Command-line runs on the shipped configs."""

import csv
import json
from pathlib import Path

import pytest

from spillover_lab.cli import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(tmp_path, command, config, *extra):
    out = tmp_path / "out"
    code = run([command, "--config", str(config), "--out", str(out), *extra])
    return code, out


def test_bayes_preference_gaps(tmp_path):
    code, out = _run(tmp_path, "bayes", CONFIGS / "bayes_preference.json", "--verify")
    assert code == 0
    doc = json.loads((out / "bayes.json").read_text())
    assert doc["model"]["spilloverGaps"]["y1"] == pytest.approx([0.3, -0.3])
    assert doc["model"]["classification"] == "PreferenceBased"


def test_bayes_uniform_is_neither(tmp_path):
    code, out = _run(tmp_path, "bayes", CONFIGS / "bayes_uniform.json")
    assert code == 0
    assert json.loads((out / "bayes.json").read_text())["model"]["classification"] == "Neither"


def test_malformed_json_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(tmp_path, "bayes", bad)[0] == 2


def test_missing_schema_version_exit_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"kind": "preference"}}))
    assert _run(tmp_path, "bayes", cfg)[0] == 2


def test_invalid_model_exit_3(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schemaVersion": 1, "model": {"table": [0.1] * 16}}))
    assert _run(tmp_path, "bayes", cfg)[0] == 3


def test_identity_outputs(tmp_path):
    code, out = _run(tmp_path, "identity", CONFIGS / "identity.json", "--verify")
    assert code == 0
    doc = json.loads((out / "identity.json").read_text())
    assert doc["distortion"]["belief"] == pytest.approx(0.8)
    assert doc["threshold"]["chiStar"] == pytest.approx(0.2445170925694726, abs=1e-6)


def test_identity_chi_out_of_range_exit_3(tmp_path):
    doc = json.loads((CONFIGS / "identity.json").read_text())
    doc["distortion"]["chi"] = 0.6
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    assert _run(tmp_path, "identity", cfg)[0] == 3


def test_election_csv(tmp_path):
    code, out = _run(tmp_path, "election", CONFIGS / "election.json", "--format", "csv", "--verify")
    assert code == 0
    rows = list(csv.DictReader((out / "election.csv").open()))
    given = rows[0]
    assert float(given["payoff"]) == pytest.approx(0.533171, abs=1e-6)
    assert float(given["qSP_x"]) == pytest.approx(0.707107, abs=1e-6)
    assert [r["scenario"] for r in rows if r["optimal"] == "yes"] == ["(stance1,SC)"]


def test_media_sweep_csv(tmp_path):
    code, out = _run(tmp_path, "media", CONFIGS / "media.json", "--format", "csv", "--verify")
    assert code == 0
    rows = list(csv.DictReader((out / "media.csv").open()))
    assert [r["regime"] for r in rows][:4] == ["Low", "Low", "Low", "High"]
    assert list(rows[0]) == ["D_E", "D", "profitA", "profitB", "regime"]


def test_simulate_csv(tmp_path):
    code, out = _run(tmp_path, "simulate", CONFIGS / "simulate_identity.json", "--format", "csv")
    assert code == 0
    rows = {r["name"]: r for r in csv.DictReader((out / "simulate.csv").open())}
    assert float(rows["beta2"]["z"]) < -3
    assert (out / "simulate_correlations.csv").exists()


def test_seed_override_changes_simulation(tmp_path):
    _, a = _run(tmp_path / "a", "simulate", CONFIGS / "simulate_identity.json")
    _, b = _run(tmp_path / "b", "simulate", CONFIGS / "simulate_identity.json", "--seed", "99")
    assert (a / "simulate.json").read_bytes() != (b / "simulate.json").read_bytes()


def test_verification_failure_exit_4(tmp_path, monkeypatch):
    from spillover_lab import oracles

    monkeypatch.setattr(oracles, "threshold_closed_form", lambda *a: 0.3)
    assert _run(tmp_path, "identity", CONFIGS / "identity.json", "--verify")[0] == 4


def test_unwritable_output_exit_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = run(["bayes", "--config", str(CONFIGS / "bayes_uniform.json"), "--out", str(blocker / "sub")])
    assert code == 2
