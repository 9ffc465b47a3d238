"""HTTP gateway: auth, ingestion, projections, SSE stream, persistence."""

from __future__ import annotations

import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from rangehall.definition import definition_to_dict
from rangehall.server import create_app

from .conftest import T0, minimal_ctf_dict


@pytest.fixture
def client(ctf_def):
    app = create_app()
    with TestClient(app) as c:
        yield c


def create_run(client, ctf_def, run_id="run-http"):
    body = {
        "definition": definition_to_dict(ctf_def),
        "run_id": run_id,
        "start_time": T0,
        "participants": [
            {"actor_id": "alice", "role": "trainee"},
            {"actor_id": "bob", "role": "trainee"},
            {"actor_id": "sup-1", "role": "supervisor"},
            {"actor_id": "op-1", "role": "operator"},
        ],
    }
    resp = client.post("/runs", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()


def auth(tokens, actor):
    return {"Authorization": f"Bearer {tokens[actor]}"}


def post_event(client, run_id, tokens, poster, actor, payload, ts):
    return client.post(f"/runs/{run_id}/events", headers=auth(tokens, poster),
                       json={"timestamp": ts, "actor_id": actor, "payload": payload})


def test_create_run_returns_tokens(client, ctf_def):
    created = create_run(client, ctf_def)
    assert created["run_id"] == "run-http"
    assert set(created["tokens"]) == {"alice", "bob", "sup-1", "op-1"}


def test_create_run_rejects_invalid_definition(client):
    doc = minimal_ctf_dict()
    doc["scenario"]["levels"] = []  # CTF needs levels
    resp = client.post("/runs", json={"definition": doc, "participants": []})
    assert resp.status_code == 422
    assert any(d["code"] == "CTF_NO_LEVELS" for d in resp.json()["detail"])


def test_ingest_requires_token(client, ctf_def):
    created = create_run(client, ctf_def)
    resp = client.post(f"/runs/{created['run_id']}/events",
                       json={"timestamp": T0, "actor_id": "alice",
                             "payload": {"kind": "LevelStarted", "level_id": "L1"}})
    assert resp.status_code == 401


def test_ingest_assigns_seq(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    r1 = post_event(client, "run-http", tokens, "alice", "alice",
                    {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
    r2 = post_event(client, "run-http", tokens, "alice", "alice",
                    {"kind": "HintTaken", "level_id": "L1", "hint_id": "L1h1"}, T0 + 2)
    assert (r1.json()["seq"], r2.json()["seq"]) == (1, 2)


def test_trainee_cannot_post_for_others(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    resp = post_event(client, "run-http", tokens, "alice", "bob",
                      {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
    assert resp.status_code == 403
    # supervisors ingest on behalf of the range
    resp = post_event(client, "run-http", tokens, "sup-1", "bob",
                      {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
    assert resp.status_code == 201


def test_ingest_rejects_bad_reference(client, ctf_def):
    created = create_run(client, ctf_def)
    resp = post_event(client, "run-http", created["tokens"], "alice", "alice",
                      {"kind": "LevelStarted", "level_id": "L99"}, T0 + 1)
    assert resp.status_code == 422


def test_view_projection_and_isolation(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    post_event(client, "run-http", tokens, "alice", "alice",
               {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
    post_event(client, "run-http", tokens, "bob", "bob",
               {"kind": "CommandEntered", "text": "SECRET-bob"}, T0 + 2)
    resp = client.get("/runs/run-http/view", headers=auth(tokens, "alice"),
                      params={"role": "trainee", "actor": "alice"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["kind"] == "trainee"
    assert "SECRET-bob" not in json.dumps(body)


def test_view_role_forbidden(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    resp = client.get("/runs/run-http/view", headers=auth(tokens, "alice"),
                      params={"role": "supervisor", "actor": "alice"})
    assert resp.status_code == 403


def test_view_token_actor_mismatch(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    resp = client.get("/runs/run-http/view", headers=auth(tokens, "alice"),
                      params={"role": "trainee", "actor": "bob"})
    assert resp.status_code == 403


def test_scoreboard_endpoint(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    post_event(client, "run-http", tokens, "alice", "alice",
               {"kind": "LevelCompleted", "level_id": "L1"}, T0 + 60)
    resp = client.get("/runs/run-http/scoreboard", headers=auth(tokens, "bob"))
    assert resp.status_code == 200
    rows = resp.json()["rows"]
    assert rows[0] == {"subject": "alice", "total": 100,
                       "per_category": {"level_completion": 100}}


def test_alerts_restricted_to_organizers(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    post_event(client, "run-http", tokens, "alice", "alice",
               {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
    denied = client.get("/runs/run-http/alerts", headers=auth(tokens, "alice"))
    assert denied.status_code == 403
    allowed = client.get("/runs/run-http/alerts", headers=auth(tokens, "sup-1"),
                         params={"as_of": T0 + 40 * 60})
    assert allowed.status_code == 200
    assert [a["kind"] for a in allowed.json()] == ["stuck"]


def test_feedback_needs_closed_run(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    post_event(client, "run-http", tokens, "alice", "alice",
               {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
    post_event(client, "run-http", tokens, "alice", "alice",
               {"kind": "LevelCompleted", "level_id": "L1"}, T0 + 300)
    early = client.get("/runs/run-http/feedback/alice", headers=auth(tokens, "alice"))
    assert early.status_code == 409
    closed = client.post("/runs/run-http/close", headers=auth(tokens, "sup-1"),
                         json={"end_time": T0 + 3600})
    assert closed.status_code == 200
    fb = client.get("/runs/run-http/feedback/alice", headers=auth(tokens, "alice"))
    assert fb.status_code == 200
    assert fb.json()["total_score"] == 100
    assert fb.json()["rank"] == 1
    # personal: bob may not read alice's feedback, the supervisor may
    assert client.get("/runs/run-http/feedback/alice",
                      headers=auth(tokens, "bob")).status_code == 403
    assert client.get("/runs/run-http/feedback/alice",
                      headers=auth(tokens, "sup-1")).status_code == 200


def test_raw_events_supervisor_only(client, ctf_def):
    created = create_run(client, ctf_def)
    tokens = created["tokens"]
    post_event(client, "run-http", tokens, "alice", "alice",
               {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
    denied = client.get("/runs/run-http/events", headers=auth(tokens, "alice"))
    assert denied.status_code == 403
    ok = client.get("/runs/run-http/events", headers=auth(tokens, "op-1"))
    assert ok.status_code == 200
    lines = ok.text.strip().splitlines()
    assert json.loads(lines[0])["type"] == "run_header"
    assert json.loads(lines[1])["payload"]["kind"] == "LevelStarted"


def _free_port() -> int:
    import socket

    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_stream_delivers_refresh_notice(ctf_def):
    """The in-process TestClient buffers streaming bodies, so the SSE
    channel is exercised against a real server on the loopback."""
    import httpx
    import uvicorn

    app = create_app()
    port = _free_port()
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port,
                                           log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.time() + 10
        while not server.started:
            assert time.time() < deadline, "server failed to start"
            time.sleep(0.02)
        base = f"http://127.0.0.1:{port}"
        with httpx.Client(base_url=base, timeout=10.0) as http:
            created = http.post("/runs", json={
                "definition": definition_to_dict(ctf_def),
                "run_id": "run-live",
                "start_time": T0,
                "participants": [
                    {"actor_id": "alice", "role": "trainee"},
                    {"actor_id": "sup-1", "role": "supervisor"},
                ],
            }).json()
            tokens = created["tokens"]

            def poke():
                time.sleep(0.3)
                http_poke = httpx.Client(base_url=base, timeout=10.0)
                http_poke.post("/runs/run-live/events",
                               headers=auth(tokens, "alice"),
                               json={"timestamp": T0 + 5, "actor_id": "alice",
                                     "payload": {"kind": "LevelStarted",
                                                 "level_id": "L1"}})
                http_poke.close()

            threading.Thread(target=poke).start()
            got_refresh = None
            with http.stream("GET", "/runs/run-live/stream",
                             headers=auth(tokens, "sup-1")) as resp:
                assert resp.status_code == 200
                assert resp.headers["content-type"].startswith("text/event-stream")
                for line in resp.iter_lines():
                    if line.startswith("data:") and '"channels"' in line:
                        got_refresh = json.loads(line.split("data:", 1)[1])
                        break
    finally:
        server.should_exit = True
        thread.join(timeout=5)
    assert got_refresh is not None
    assert got_refresh["seq"] == 1
    assert ["supervisor", "sup-1"] in got_refresh["channels"]
    assert ["trainee", "alice"] in got_refresh["channels"]


def test_unknown_run_404(client, ctf_def):
    resp = client.get("/runs/nope/scoreboard", headers={"Authorization": "Bearer x"})
    assert resp.status_code == 404


def test_persistence_round_trip(tmp_path, ctf_def):
    app = create_app(data_dir=str(tmp_path))
    with TestClient(app) as client:
        created = create_run(client, ctf_def)
        tokens = created["tokens"]
        post_event(client, "run-http", tokens, "alice", "alice",
                   {"kind": "LevelStarted", "level_id": "L1"}, T0 + 1)
        post_event(client, "run-http", tokens, "alice", "alice",
                   {"kind": "LevelCompleted", "level_id": "L1"}, T0 + 120)
        client.post("/runs/run-http/close", headers=auth(tokens, "sup-1"),
                    json={"end_time": T0 + 3600})

    # a fresh app over the same data dir resumes the stored run
    app2 = create_app(data_dir=str(tmp_path))
    with TestClient(app2) as client2:
        runs = client2.get("/runs").json()
        assert [r["run_id"] for r in runs] == ["run-http"]
        assert runs[0]["events"] == 2
        assert runs[0]["closed"] is True
