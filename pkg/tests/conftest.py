"""Shared fixtures: definition builders and hand-rolled log builders."""

from __future__ import annotations

import pytest

ACCEPTANCE_CRITERIA = {
    "test_c1_scoring_conservation": "C1 scoring conservation (1000 seeded runs)",
    "test_c2_deterministic_replay": "C2 deterministic replay and split scoring",
    "test_c3_structural_fidelity": "C3 structural fidelity (20-trainee CTF, 6-team CDX)",
    "test_c4_trouble_detection_oracle_equivalence": "C4 trouble-detection oracle equivalence",
    "test_c5_behavior_and_infra_oracles": "C5 behavior-graph and MTTF/uptime oracles",
    "test_c6_difficulty_monotonicity": "C6 difficulty monotonicity and comparison",
    "test_c7_role_isolation": "C7 role isolation (500 random logs)",
    "test_c8_round_trip_canonical_corpus": "C8 round-trip canonical corpus",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for status in ("passed", "failed"):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", None) != "call":
                continue
            name = report.nodeid.split("::")[-1]
            if name in ACCEPTANCE_CRITERIA:
                results[name] = "PASS" if status == "passed" else "FAIL"
    if results:
        terminalreporter.section("acceptance criteria")
        for name, label in ACCEPTANCE_CRITERIA.items():
            if name in results:
                terminalreporter.write_line(f"{results[name]}  {label}")

from rangehall.definition import TrainingDefinition, definition_from_dict
from rangehall.events import EventLog, Participant, TrainingRun

T0 = 1_700_000_000.0  # fixed origin for hand-built logs


def minimal_ctf_dict() -> dict:
    """Smallest valid CTF document: one level, no hints."""
    return {
        "schema_version": 1,
        "id": "mini",
        "title": "Minimal CTF",
        "kind": "CTF",
        "expected_total_duration": 60,
        "max_participants": 10,
        "scenario": {
            "topology": {"nodes": [{"node_id": "host1", "role": "victim"}]},
            "levels": [
                {"id": "L1", "order": 1, "title": "Only level", "flag": "FLAG{one}",
                 "max_points": 100, "expected_duration": 15},
            ],
        },
        "criteria": {},
    }


def ctf_dict(n_levels: int = 5, hints_per_level: int = 2, expected_duration: float = 15,
             max_points: int = 100, hint_penalty: int = 10, skip_penalty: int = 20,
             total_duration: float = 120, def_id: str = "ctf-fix") -> dict:
    return {
        "schema_version": 1,
        "id": def_id,
        "title": "Fixture CTF",
        "kind": "CTF",
        "expected_total_duration": total_duration,
        "max_participants": 20,
        "scenario": {
            "topology": {
                "nodes": [
                    {"node_id": "attacker", "role": "attacker"},
                    {"node_id": "web1", "role": "server", "services": ["http", "ssh"]},
                    {"node_id": "ws1", "role": "workstation"},
                ],
                "links": [["attacker", "web1"], ["web1", "ws1"]],
            },
            "vulnerabilities": [{"node_id": "web1", "label": "weak-password"}],
            "levels": [
                {
                    "id": f"L{i}",
                    "order": i,
                    "title": f"Level {i}",
                    "task_text": f"Break into target {i}.",
                    "flag": f"FLAG{{lvl{i}}}",
                    "max_points": max_points,
                    "expected_duration": expected_duration,
                    "solution_text": f"Solution for level {i}.",
                    "skip_penalty": skip_penalty,
                    "hints": [
                        {"id": f"L{i}h{j}", "text": f"Hint {j} for level {i}",
                         "penalty_points": hint_penalty}
                        for j in range(1, hints_per_level + 1)
                    ],
                }
                for i in range(1, n_levels + 1)
            ],
        },
        "criteria": {"wrong_flag_penalty": 5, "free_attempts": 3},
    }


def cdx_dict(teams: int = 3, services_per_team: int = 2, check_interval: float = 600,
             total_duration: float = 360, categories: int = 4, attack_penalty: int = 50,
             def_id: str = "cdx-fix") -> dict:
    nodes = [{"node_id": "red-infra", "role": "attacker"}]
    services = []
    plan = []
    for t in range(1, teams + 1):
        for s in range(1, services_per_team + 1):
            nid = f"net{t}-srv{s}"
            nodes.append({"node_id": nid, "role": "server", "services": ["http", "dns"]})
            services.append({
                "id": f"svc-{nid}", "node_id": nid, "service_name": "http",
                "check_interval": check_interval,
                "award_per_check": 1, "penalty_per_failed_check": 1,
            })
        plan.append({
            "id": f"atk-{t}", "scheduled_offset": 30.0 * t, "attack_type": "DDoS",
            "target": f"net{t}-srv1", "penalty_points": attack_penalty,
            "details": f"flood team {t}",
        })
    cats = ["DDoS"] + [f"task-{c}" for c in range(1, categories)]
    return {
        "schema_version": 1,
        "id": def_id,
        "title": "Fixture CDX",
        "kind": "CDX",
        "expected_total_duration": total_duration,
        "max_participants": 40,
        "scenario": {"topology": {"nodes": nodes, "links": []}, "attack_plan": plan},
        "criteria": {
            "scored_services": services,
            "manual_penalty_categories": cats,
            "revert_penalty": 10,
            "wrong_flag_penalty": 0,
        },
    }


@pytest.fixture
def minimal_ctf() -> TrainingDefinition:
    return definition_from_dict(minimal_ctf_dict())


@pytest.fixture
def ctf_def() -> TrainingDefinition:
    return definition_from_dict(ctf_dict())


@pytest.fixture
def cdx_def() -> TrainingDefinition:
    return definition_from_dict(cdx_dict())


def new_log(defn: TrainingDefinition, actors: list[str] | None = None,
            roles: dict[str, str] | None = None, run_id: str = "run-1") -> EventLog:
    """Open log with the given trainees (plus one supervisor)."""
    actors = actors or ["alice", "bob"]
    roles = roles or {}
    participants = [Participant(a, roles.get(a, "trainee")) for a in actors]
    participants.append(Participant("sup-1", "supervisor"))
    run = TrainingRun(run_id=run_id, definition_id=defn.id, start_time=T0,
                      participants=tuple(participants))
    return EventLog(run, defn)
