"""CLI subcommands: exit codes, outputs, and the simulate/score/analyze chain."""

from __future__ import annotations

import json

import pytest
import yaml

from rangehall.cli import main

from .conftest import cdx_dict, ctf_dict


@pytest.fixture
def ctf_file(tmp_path):
    path = tmp_path / "ctf.json"
    path.write_text(json.dumps(ctf_dict()), encoding="utf-8")
    return str(path)


@pytest.fixture
def cdx_file(tmp_path):
    path = tmp_path / "cdx.yaml"
    path.write_text(yaml.safe_dump(cdx_dict()), encoding="utf-8")
    return str(path)


def test_validate_ok(ctf_file, capsys):
    assert main(["validate", ctf_file]) == 0
    out = capsys.readouterr().out
    assert "OK" in out


def test_validate_errors_exit_one(tmp_path, capsys):
    doc = ctf_dict(n_levels=2)
    doc["scenario"]["levels"][1]["flag"] = doc["scenario"]["levels"][0]["flag"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["validate", str(path)]) == 1
    captured = capsys.readouterr()
    assert "DUPLICATE_FLAG" in captured.out


def test_missing_file_exit_one(capsys):
    assert main(["validate", "/no/such/file.json"]) == 1
    assert "error" in capsys.readouterr().err


def test_usage_error_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_simulate_score_analyze_chain(ctf_file, tmp_path, capsys):
    log_path = str(tmp_path / "run.jsonl")
    config_path = tmp_path / "sim.yaml"
    config_path.write_text(yaml.safe_dump({
        "seed": 21,
        "wall_duration": 120,
        "profiles": [
            {"actor_id": "t1", "skill": 0.8, "hint_propensity": 0.2},
            {"actor_id": "t2", "skill": 0.3, "hint_propensity": 0.7,
             "guess_propensity": 0.6},
        ],
    }), encoding="utf-8")

    assert main(["simulate", ctf_file, "--config", str(config_path),
                 "--out", log_path]) == 0
    capsys.readouterr()

    tx_path = str(tmp_path / "tx.jsonl")
    assert main(["score", ctf_file, log_path, "--transactions", tx_path]) == 0
    table = capsys.readouterr().out
    assert "t1" in table and "t2" in table
    first_tx = json.loads(open(tx_path, encoding="utf-8").readline())
    assert first_tx["type"] == "transaction"

    assert main(["analyze", "feedback", ctf_file, log_path, "--actor", "t1",
                 "--json"]) == 0
    fb = json.loads(capsys.readouterr().out)
    assert fb["actor_id"] == "t1"
    assert isinstance(fb["per_level"], list)

    assert main(["analyze", "quality", ctf_file, log_path, "--json"]) == 0
    quality = json.loads(capsys.readouterr().out)
    assert quality["run_count"] == 1
    assert len(quality["per_level"]) == 5

    assert main(["analyze", "behavior", ctf_file, log_path]) == 0
    out = capsys.readouterr().out
    assert "directly-follows" in out


def test_score_json_output(ctf_file, tmp_path, capsys):
    log_path = str(tmp_path / "run.jsonl")
    main(["simulate", ctf_file, "--out", log_path, "--seed", "5"])
    capsys.readouterr()
    assert main(["score", ctf_file, log_path, "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert set(data) == {"rows", "run_id"}


def test_simulate_seed_reproducible(ctf_file, tmp_path, capsys):
    a, b = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
    main(["simulate", ctf_file, "--out", a, "--seed", "33"])
    main(["simulate", ctf_file, "--out", b, "--seed", "33"])
    capsys.readouterr()
    assert open(a, encoding="utf-8").read() == open(b, encoding="utf-8").read()


def test_cdx_simulate_and_infra(cdx_file, tmp_path, capsys):
    log_path = str(tmp_path / "cdx.jsonl")
    config_path = tmp_path / "cdx-sim.yaml"
    config_path.write_text(yaml.safe_dump({
        "seed": 13,
        "wall_duration": 360,
        "team_profiles": {"blue-1": 0.9, "blue-2": 0.4, "blue-3": 0.1},
    }), encoding="utf-8")
    assert main(["simulate", cdx_file, "--config", str(config_path),
                 "--out", log_path]) == 0
    capsys.readouterr()
    assert main(["analyze", "infra", cdx_file, log_path, "--json"]) == 0
    infra = json.loads(capsys.readouterr().out)
    assert len(infra["services"]) == 6
    assert main(["analyze", "behavior", cdx_file, log_path, "--communication"]) == 0
    out = capsys.readouterr().out
    assert "communication leaders" in out


def test_compare_command(ctf_file, tmp_path, capsys):
    harder_doc = ctf_dict(expected_duration=30, hints_per_level=1, def_id="ctf-hard")
    harder_file = tmp_path / "hard.json"
    harder_file.write_text(json.dumps(harder_doc), encoding="utf-8")
    log_a = str(tmp_path / "a.jsonl")
    log_b = str(tmp_path / "b.jsonl")
    main(["simulate", ctf_file, "--out", log_a, "--seed", "3"])
    main(["simulate", str(harder_file), "--out", log_b, "--seed", "3"])
    capsys.readouterr()
    assert main(["analyze", "compare", "--definition-a", ctf_file, "--runs-a", log_a,
                 "--definition-b", str(harder_file), "--runs-b", log_b,
                 "--json"]) == 0
    cmp = json.loads(capsys.readouterr().out)
    assert cmp["harder"] in ("a", "b", "indistinguishable")


def test_serve_flag_and_env_precedence(monkeypatch, ctf_file):
    captured = {}

    def fake_run(app, host, port, log_level):
        captured.update(host=host, port=port)

    monkeypatch.setattr("uvicorn.run", fake_run)
    monkeypatch.setenv("RANGEHALL_PORT", "9999")
    assert main(["serve", "--port", "7001"]) == 0
    assert captured["port"] == 7001  # flag beats env
    assert main(["serve"]) == 0
    assert captured["port"] == 9999  # env beats default
