#!/usr/bin/env python3
"""Generate dashboard test fixtures from seeded simulations.

For each of five seeds: the supervisor view payload at end of run, one
trainee's feedback summary plus score timeline, and the sparring view of
a CDX run. Deterministic; re-running reproduces the files.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT))

from rangehall.analytics import personal_feedback  # noqa: E402
from rangehall.definition import definition_from_dict  # noqa: E402
from rangehall.gateway import project_role_view  # noqa: E402
from rangehall.scoring import build_timeline, score_ctf_run  # noqa: E402
from rangehall.simulate import (  # noqa: E402
    SimulationConfig,
    TraineeProfile,
    simulate_cdx_run,
    simulate_ctf_run,
)
from tests.conftest import cdx_dict, ctf_dict  # noqa: E402

OUT = ROOT / "frontend" / "test" / "fixtures"

SEEDS = (11, 23, 37, 53, 71)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    ctf = definition_from_dict(ctf_dict())
    for seed in SEEDS:
        profiles = [
            TraineeProfile(f"t{i}", skill=0.25 + 0.15 * i, hint_propensity=0.5,
                           guess_propensity=0.4)
            for i in range(4)
        ]
        run, log = simulate_ctf_run(ctf, profiles, SimulationConfig(
            seed=seed, wall_duration=120))
        supervisor = project_role_view(log, ("sup-1", "supervisor"), run.end_time)
        (OUT / f"overview-{seed}.json").write_text(
            json.dumps(supervisor.payload, sort_keys=True, indent=1) + "\n",
            encoding="utf-8")

        fb = personal_feedback(log, "t0")
        own = [tx for tx in score_ctf_run(ctf, list(log.events())) if tx.subject == "t0"]
        timeline = build_timeline(own)
        (OUT / f"feedback-{seed}.json").write_text(
            json.dumps({
                "feedback": asdict(fb),
                "timeline": [[ts, total] for ts, total in timeline.points],
                "run": {"start_time": run.start_time, "end_time": run.end_time},
            }, sort_keys=True, indent=1) + "\n", encoding="utf-8")

    cdx = definition_from_dict(cdx_dict())
    run, log = simulate_cdx_run(cdx, SimulationConfig(
        seed=5, wall_duration=360,
        team_profiles={"blue-1": 0.9, "blue-2": 0.4, "blue-3": 0.0}))
    sparring = project_role_view(log, ("red-1", "sparring_partner"), run.end_time)
    (OUT / "attack-plan.json").write_text(
        json.dumps(sparring.payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    board = project_role_view(log, ("white-1", "supervisor"), run.end_time)
    (OUT / "cdx-scoreboard.json").write_text(
        json.dumps(board.payload["scoreboard"], sort_keys=True, indent=1) + "\n",
        encoding="utf-8")
    print(f"wrote fixtures for seeds {SEEDS} to {OUT}")


if __name__ == "__main__":
    main()
