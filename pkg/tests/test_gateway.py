"""Role-scoped projection: isolation, attack states, and update routing."""

from __future__ import annotations

import json

import pytest

from rangehall.errors import NotAParticipantError, RoleForbiddenError
from rangehall.events import (
    EventLog,
    HintTaken,
    LevelStarted,
    ManualScoring,
    MessageSent,
    Participant,
    ServiceProbe,
    TrainingRun,
)
from rangehall.gateway import project_role_view, publish_update
from rangehall.simulate import SimulationConfig, TraineeProfile, simulate_cdx_run, simulate_ctf_run

from .conftest import T0, ctf_dict, new_log
from .oracles import random_ctf_log


def view_json(view) -> str:
    return json.dumps(view.payload, sort_keys=True)


# --- access control ---------------------------------------------------------------


def test_unregistered_viewer_rejected(ctf_def):
    log = new_log(ctf_def)
    with pytest.raises(NotAParticipantError):
        project_role_view(log, ("ghost", "trainee"), T0)


def test_trainee_cannot_request_supervisor_view(ctf_def):
    log = new_log(ctf_def)
    with pytest.raises(RoleForbiddenError):
        project_role_view(log, ("alice", "supervisor"), T0)
    with pytest.raises(RoleForbiddenError):
        project_role_view(log, ("alice", "operator"), T0)


def test_white_team_duality(cdx_def):
    participants = (Participant("white-1", "supervisor"),
                    Participant("red-1", "sparring_partner"))
    run = TrainingRun("r", cdx_def.id, T0, participants=participants)
    log = EventLog(run, cdx_def)
    # white team holds both roles: either may request either view
    assert project_role_view(log, ("white-1", "sparring_partner"), T0).kind == "sparring"
    assert project_role_view(log, ("white-1", "supervisor"), T0).kind == "supervisor"
    assert project_role_view(log, ("red-1", "supervisor"), T0).kind == "supervisor"


def test_payload_kind_determined_by_role(ctf_def):
    log = new_log(ctf_def)
    assert project_role_view(log, ("alice", "trainee"), T0).kind == "trainee"
    assert project_role_view(log, ("sup-1", "supervisor"), T0).kind == "supervisor"


# --- trainee isolation ----------------------------------------------------------------


def test_trainee_view_own_events_only(ctf_def):
    log = new_log(ctf_def, actors=["alice", "bob"])
    log.append(T0 + 1, "alice", LevelStarted("L1"))
    log.append(T0 + 2, "bob", LevelStarted("L2"))
    log.append(T0 + 3, "bob", HintTaken("L2", "L2h1"))
    view = project_role_view(log, ("alice", "trainee"), T0 + 10)
    # oracle: filter comparison against the full log
    assert view.payload["current_level"]["level_id"] == "L1"
    assert view.payload["hints_taken"] == []
    assert [iv["level_id"] for iv in view.payload["intervals"]] == ["L1"]
    blob = view_json(view)
    assert "L2h1" not in blob
    assert "bob" not in blob


@pytest.mark.parametrize("seed", range(10))
def test_isolation_no_marker_leaks(ctf_def, seed):
    """Random logs carry per-actor SECRET markers; no trainee projection may
    contain another trainee's marker, and sparring views never contain
    command payloads."""
    log = random_ctf_log(ctf_def, seed, n_trainees=4, n_events=120)
    now = log.events()[-1].timestamp
    actors = [t.actor_id for t in log.run.trainees()]
    for actor in actors:
        blob = view_json(project_role_view(log, (actor, "trainee"), now))
        for other in actors:
            if other != actor:
                assert f"SECRET-{other}" not in blob
    sparring_blob = view_json(project_role_view(log, ("red-1", "sparring_partner"), now))
    assert "SECRET-" not in sparring_blob  # no CommandEntered/message content at all


def test_trainee_view_hides_attack_plan(cdx_def):
    config = SimulationConfig(seed=3, wall_duration=120,
                              team_profiles={"blue-1": 0.5, "blue-2": 0.5, "blue-3": 0.5})
    run, log = simulate_cdx_run(cdx_def, config)
    view = project_role_view(log, ("blue-1-member-1", "trainee"), run.end_time)
    blob = view_json(view)
    assert "attack_plan" not in blob
    assert "atk-1" not in blob
    # and only the own team's nodes are visible
    nodes = {n["node_id"] for n in view.payload["topology"]["nodes"]}
    assert nodes == {"net1-srv1", "net1-srv2"}


def test_trainee_sees_received_messages(ctf_def):
    log = new_log(ctf_def, actors=["alice", "bob"])
    log.append(T0 + 1, "sup-1", MessageSent("alice", "try the hint"))
    view = project_role_view(log, ("alice", "trainee"), T0 + 5)
    assert view.payload["messages"] == [
        {"from": "sup-1", "text": "try the hint", "timestamp": T0 + 1}]
    bob = project_role_view(log, ("bob", "trainee"), T0 + 5)
    assert bob.payload["messages"] == []


# --- view-at-time consistency -------------------------------------------------------------


def test_projection_reflects_prefix_only(ctf_def):
    log = new_log(ctf_def, actors=["alice"])
    log.append(T0 + 1, "alice", LevelStarted("L1"))
    early = view_json(project_role_view(log, ("alice", "trainee"), T0 + 5))
    log.append(T0 + 100, "alice", HintTaken("L1", "L1h1"))
    again = view_json(project_role_view(log, ("alice", "trainee"), T0 + 5))
    assert early == again  # later events invisible at the earlier as_of


def test_projection_deterministic(ctf_def):
    profiles = [TraineeProfile(f"t{i}", skill=0.4) for i in range(3)]
    run, log = simulate_ctf_run(ctf_def, profiles, SimulationConfig(seed=5))
    a = view_json(project_role_view(log, ("sup-1", "supervisor"), run.end_time))
    b = view_json(project_role_view(log, ("sup-1", "supervisor"), run.end_time))
    assert a == b


# --- attack plan states ----------------------------------------------------------------------


def _cdx_log(cdx_def):
    participants = (
        Participant("blue-1-m1", "trainee", "blue-1"),
        Participant("red-1", "sparring_partner"),
        Participant("white-1", "supervisor"),
    )
    run = TrainingRun("r", cdx_def.id, T0, participants=participants)
    return EventLog(run, cdx_def)


def test_attack_all_inactive_before_offsets(cdx_def):
    log = _cdx_log(cdx_def)
    view = project_role_view(log, ("red-1", "sparring_partner"), T0 + 60)
    assert [e["runtime_state"] for e in view.payload["attack_plan"]] == ["inactive"] * 3


def test_attack_ongoing_after_offset(cdx_def):
    log = _cdx_log(cdx_def)
    # offsets are 30/60/90 min
    view = project_role_view(log, ("red-1", "sparring_partner"), T0 + 45 * 60)
    states = {e["attack_id"]: e["runtime_state"] for e in view.payload["attack_plan"]}
    assert states == {"atk-1": "ongoing", "atk-2": "inactive", "atk-3": "inactive"}


def test_attack_completed_with_outcome(cdx_def):
    log = _cdx_log(cdx_def)
    log.append(T0 + 35 * 60, "red-1", ManualScoring(
        issued_by="red-1", subject="blue-1", category="DDoS", points=-50,
        comment="flooded", attack_id="atk-1", attack_outcome="success"))
    view = project_role_view(log, ("red-1", "sparring_partner"), T0 + 45 * 60)
    atk1 = next(e for e in view.payload["attack_plan"] if e["attack_id"] == "atk-1")
    assert atk1["runtime_state"] == "completed"
    assert atk1["outcome"] == "success"
    assert atk1["comments"] == ["flooded"]


# --- publish_update --------------------------------------------------------------------------


def all_channels(run):
    return {(p.role, p.actor_id) for p in run.participants}


def diff_channels(log, event):
    """Projection-diff oracle: project every participant's registered view
    with and without the event at the event's timestamp."""
    as_of = event.timestamp
    before = EventLog(log.run, log.definition)
    before._events = [ev for ev in log.events() if ev.seq != event.seq]
    changed = set()
    for p in log.run.participants:
        va = view_json(project_role_view(before, (p.actor_id, p.role), as_of))
        vb = view_json(project_role_view(log, (p.actor_id, p.role), as_of))
        if va != vb:
            changed.add((p.role, p.actor_id))
    return changed


def test_hint_refreshes_trainee_and_supervisors(ctf_def):
    log = new_log(ctf_def, actors=["alice", "bob"])
    log.append(T0 + 1, "alice", LevelStarted("L1"))
    log.append(T0 + 2, "bob", LevelStarted("L1"))
    ev = log.append(T0 + 3, "alice", HintTaken("L1", "L1h1"))
    got = publish_update(log, ev)
    assert ("trainee", "alice") in got
    assert ("supervisor", "sup-1") in got
    assert got == diff_channels(log, ev)


def test_probe_refreshes_operators_and_affected_team(cdx_def):
    config = SimulationConfig(seed=1, wall_duration=60,
                              team_profiles={"blue-1": 1.0, "blue-2": 1.0, "blue-3": 1.0})
    run, log = simulate_cdx_run(cdx_def, config)
    probe = next(ev for ev in log.events() if isinstance(ev.payload, ServiceProbe))
    got = publish_update(log, probe)
    assert ("operator", "green-1") in got
    svc = cdx_def.service_by_id(probe.payload.service_id)
    team = {"net1": "blue-1", "net2": "blue-2", "net3": "blue-3"}[svc.node_id.split("-")[0]]
    affected = {a for (r, a) in got if r == "trainee"}
    # the defending team's members always refresh; other teams only when
    # their scoreboard position moved
    assert {a for a in affected if a.startswith(team)}
    assert got == diff_channels(log, probe)


def test_event_affecting_no_view_is_empty(ctf_def):
    from rangehall.events import QuestionnaireAnswered

    doc = ctf_dict()
    doc["criteria"]["questionnaires"] = [{"id": "q1", "items": ["how was it"]}]
    from rangehall.definition import definition_from_dict

    defn = definition_from_dict(doc)
    participants = (Participant("alice", "trainee"),)  # no supervisors registered
    run = TrainingRun("r", defn.id, T0, participants=participants)
    log = EventLog(run, defn)
    ev = log.append(T0 + 1, "alice", QuestionnaireAnswered("q1", {"a": 1}))
    got = publish_update(log, ev)
    assert got == set() == diff_channels(log, ev)


@pytest.mark.parametrize("seed", range(6))
def test_publish_update_matches_projection_diff_ctf(ctf_def, seed):
    log = random_ctf_log(ctf_def, seed, n_trainees=3, n_events=50)
    events = log.events()
    for ev in events[::7]:
        assert publish_update(log, ev) == diff_channels(log, ev), \
            f"channel mismatch for seq {ev.seq} ({ev.payload})"


@pytest.mark.parametrize("seed", range(3))
def test_publish_update_matches_projection_diff_cdx(cdx_def, seed):
    config = SimulationConfig(seed=seed, wall_duration=90,
                              team_profiles={"blue-1": 0.3, "blue-2": 0.8, "blue-3": 0.5})
    run, log = simulate_cdx_run(cdx_def, config)
    events = log.events()
    step = max(len(events) // 25, 1)
    for ev in events[::step]:
        assert publish_update(log, ev) == diff_channels(log, ev), \
            f"channel mismatch for seq {ev.seq} ({ev.payload})"


def test_publish_update_soundness_everywhere(ctf_def):
    """Any channel NOT returned has a byte-identical view before and after."""
    log = random_ctf_log(ctf_def, 31, n_trainees=3, n_events=60)
    for ev in log.events()[::11]:
        returned = publish_update(log, ev)
        unchanged = all_channels(log.run) - returned
        oracle = diff_channels(log, ev)
        assert not (unchanged & oracle)
