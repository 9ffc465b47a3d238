#!/usr/bin/env python3
"""Generate the definition corpus under tests/data/definitions/.

Deterministic: re-running produces identical files. Half the corpus is
canonical JSON, half human-editable YAML, covering CTF shapes (5-8 levels
with hints, 1-2 h) and CDX shapes (6 team networks, dozens of scored
services, up to 30 manual categories, 6 h).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import yaml

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from rangehall.definition import parse_definition, serialize_definition  # noqa: E402

OUT = ROOT / "tests" / "data" / "definitions"


def ctf_doc(i: int, n_levels: int, hints: int, duration: int, with_questionnaire: bool):
    levels = []
    for k in range(1, n_levels + 1):
        levels.append({
            "id": f"L{k}",
            "order": k,
            "title": f"Level {k}: foothold {k}",
            "task_text": f"Compromise host target-{k} and read the flag file.",
            "flag": f"FLAG{{c{i}-level-{k}}}",
            "max_points": 50 + 10 * k,
            "expected_duration": 8 + 2 * k,
            "solution_text": f"Use the service weakness on target-{k}.",
            "skip_penalty": 10 + k,
            "hints": [
                {"id": f"L{k}h{j}", "text": f"Hint {j}: look at port {2000 + j}",
                 "penalty_points": 5}
                for j in range(1, hints + 1)
            ],
        })
    doc = {
        "schema_version": 1,
        "id": f"ctf-corpus-{i:02d}",
        "title": f"Attack game {i}",
        "kind": "CTF",
        "prerequisites": ["basic shell usage", "networking fundamentals"],
        "expected_total_duration": duration,
        "max_participants": 20,
        "scenario": {
            "topology": {
                "nodes": [
                    {"node_id": "attacker-box", "role": "attacker",
                     "services": ["vnc"]},
                    {"node_id": "router-1", "role": "router", "services": []},
                ] + [
                    {"node_id": f"target-{k}", "role": "victim",
                     "services": ["http", "ssh"]}
                    for k in range(1, n_levels + 1)
                ],
                "links": [["attacker-box", "router-1"]] + [
                    ["router-1", f"target-{k}"] for k in range(1, n_levels + 1)
                ],
            },
            "vulnerabilities": [
                {"node_id": f"target-{k}", "label": f"weak-service-{k}"}
                for k in range(1, n_levels + 1)
            ],
            "levels": levels,
        },
        "criteria": {
            "wrong_flag_penalty": i % 3,
            "free_attempts": None if i % 2 else 5,
        },
    }
    if with_questionnaire:
        doc["criteria"]["questionnaires"] = [
            {"id": "post-game", "items": ["How difficult was the session?"]}]
    return doc


def cdx_doc(i: int, teams: int, services_per_team: int, categories: int):
    nodes = [
        {"node_id": "red-c2", "role": "attacker", "services": []},
        {"node_id": "core-router", "role": "router", "services": []},
    ]
    services = []
    plan = []
    links = []
    service_names = ["http", "dns", "smtp", "imap", "ldap", "db"]
    for t in range(1, teams + 1):
        for s in range(1, services_per_team + 1):
            nid = f"blue{t}-host{s}"
            name = service_names[(s - 1) % len(service_names)]
            nodes.append({"node_id": nid, "role": "server" if s % 2 else "workstation",
                          "services": [name, "ssh"]})
            links.append(["core-router", nid])
            services.append({
                "id": f"chk-{nid}-{name}",
                "node_id": nid,
                "service_name": name,
                "check_interval": 300 if i % 2 else 600,
                "award_per_check": 1,
                "penalty_per_failed_check": 2,
                "depends_on": [f"chk-blue{t}-host1-http"] if s > 1 and i % 3 == 0 else [],
            })
        plan.append({
            "id": f"wave-{t}",
            "scheduled_offset": 25.0 * t,
            "attack_type": ["DDoS", "PHISH", "SQLI", "BRUTE"][t % 4],
            "target": f"blue{t}-host1",
            "penalty_points": 40 + 5 * t,
            "details": f"attack wave {t} against team {t}'s first host",
        })
    cats = ["DDoS", "PHISH", "SQLI", "BRUTE", "communication", "journalist-request"]
    cats += [f"inject-{n:02d}" for n in range(1, categories - len(cats) + 1)]
    return {
        "schema_version": 1,
        "id": f"cdx-corpus-{i:02d}",
        "title": f"Defense exercise {i}",
        "kind": "CDX",
        "prerequisites": ["system administration", "incident response basics"],
        "expected_total_duration": 360,
        "max_participants": 30,
        "scenario": {
            "topology": {"nodes": nodes, "links": links},
            "vulnerabilities": [
                {"node_id": f"blue{t}-host1", "label": "outdated-cms"}
                for t in range(1, teams + 1)
            ],
            "attack_plan": plan,
        },
        "criteria": {
            "scored_services": services,
            "manual_penalty_categories": cats[:categories],
            "revert_penalty": 15,
            "wrong_flag_penalty": 0,
        },
    }


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    docs = []
    for i in range(12):
        docs.append((f"ctf-{i:02d}", ctf_doc(i, n_levels=5 + i % 4, hints=1 + i % 3,
                                             duration=60 + 10 * (i % 7),
                                             with_questionnaire=i % 4 == 0)))
    for i in range(10):
        docs.append((f"cdx-{i:02d}", cdx_doc(i, teams=6, services_per_team=4 + i % 3,
                                             categories=12 + 2 * (i % 10))))
    for name, doc in docs:
        if name.endswith(("1", "3", "5", "7", "9")):
            path = OUT / f"{name}.yaml"
            path.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
        else:
            path = OUT / f"{name}.json"
            path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        parse_definition(path.read_text(encoding="utf-8"))  # sanity
    canonical = serialize_definition(parse_definition(
        (OUT / "ctf-00.json").read_text(encoding="utf-8")))
    print(f"wrote {len(docs)} definitions to {OUT}")
    print(f"canonical sample starts: {canonical[:60]!r}")


if __name__ == "__main__":
    main()
