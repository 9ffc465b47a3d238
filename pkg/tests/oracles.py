"""Independent brute-force oracles and random-log generation.

These deliberately re-derive results with different algorithms than the
library (full rescans, quadratic pair scans) so tests compare two
implementations, not one implementation with itself.
"""

from __future__ import annotations

import random

from rangehall.analytics import TroubleRules
from rangehall.definition import TrainingDefinition
from rangehall.events import (
    CommandEntered,
    EventLog,
    FlagSubmitted,
    HintTaken,
    LevelCompleted,
    LevelSkipped,
    LevelStarted,
    MessageSent,
    Participant,
    SolutionDisplayed,
    TrainingRun,
    is_user_action,
    payload_kind,
)


# --- trouble detection oracle ---------------------------------------------------


def brute_force_trouble(log: EventLog, now: float,
                        rules: TroubleRules = TroubleRules()) -> list[tuple]:
    """Full rescan per rule. Returns (actor, level, kind, raised_at) tuples
    sorted the same way the engine sorts its alerts."""
    defn = log.definition
    events = [ev for ev in log.events() if ev.timestamp <= now]
    found = []

    for trainee in log.run.trainees():
        actor = trainee.actor_id
        own = [ev for ev in events if ev.actor_id == actor]

        # stuck: rescan per level that was ever started
        levels_started = {ev.payload.level_id for ev in own
                          if isinstance(ev.payload, LevelStarted)}
        for level_id in levels_started:
            starts = [ev for ev in own if isinstance(ev.payload, LevelStarted)
                      and ev.payload.level_id == level_id]
            last_start = starts[-1]
            closed = any(
                isinstance(e.payload, (LevelCompleted, LevelSkipped))
                and e.payload.level_id == level_id and e.seq > last_start.seq
                for e in own)
            level = defn.level_by_id(level_id) if defn else None
            if not closed and level is not None:
                threshold = rules.stuck_factor * level.expected_duration * 60.0
                if now - last_start.timestamp > threshold:
                    found.append((actor, level_id, "stuck",
                                  last_start.timestamp + threshold))

        # flag_bruteforce: all-pairs window scan per level
        wrong_by_level: dict[str, list[float]] = {}
        for ev in own:
            if isinstance(ev.payload, FlagSubmitted) and not ev.payload.correct:
                wrong_by_level.setdefault(ev.payload.level_id, []).append(ev.timestamp)
        for level_id, times in wrong_by_level.items():
            times = sorted(times)
            candidates = []
            for i in range(len(times)):
                for j in range(len(times)):
                    if j - i + 1 == rules.bruteforce_n \
                            and times[j] - times[i] <= rules.bruteforce_window:
                        candidates.append(times[j])
            if candidates:
                found.append((actor, level_id, "flag_bruteforce", min(candidates)))

        # about_to_quit: first display times of every hint plus the solution
        if defn is not None:
            shown = {ev.payload.level_id for ev in own
                     if isinstance(ev.payload, SolutionDisplayed)}
            for level_id in shown:
                level = defn.level_by_id(level_id)
                if level is None:
                    continue
                display_times = []
                complete = True
                for hint in level.hints:
                    takes = [ev.timestamp for ev in own
                             if isinstance(ev.payload, HintTaken)
                             and ev.payload.level_id == level_id
                             and ev.payload.hint_id == hint.id]
                    if not takes:
                        complete = False
                        break
                    display_times.append(min(takes))
                if not complete:
                    continue
                sol = min(ev.timestamp for ev in own
                          if isinstance(ev.payload, SolutionDisplayed)
                          and ev.payload.level_id == level_id)
                display_times.append(sol)
                if max(display_times) - min(display_times) <= rules.quit_window:
                    found.append((actor, level_id, "about_to_quit", max(display_times)))

    found.sort(key=lambda t: (t[3], t[0], t[2], t[1]))
    return found


# --- directly-follows oracle ------------------------------------------------------


def quadratic_dfg(logs: list[EventLog], level_qualified: bool = False
                  ) -> dict[tuple[str, str], int]:
    """Directly-follows counts by quadratic pair scan over index pairs."""
    edges: dict[tuple[str, str], int] = {}
    for log in logs:
        for trainee in log.run.trainees():
            seq = []
            for ev in log.events():
                if ev.actor_id == trainee.actor_id and is_user_action(ev.payload):
                    kind = payload_kind(ev.payload)
                    level_id = getattr(ev.payload, "level_id", None)
                    if level_qualified and level_id is not None:
                        kind = f"{kind}:{level_id}"
                    seq.append(kind)
            for i in range(len(seq)):
                for j in range(len(seq)):
                    if j == i + 1:
                        edges[(seq[i], seq[j])] = edges.get((seq[i], seq[j]), 0) + 1
    return edges


# --- random log generation ----------------------------------------------------------


def random_ctf_log(defn: TrainingDefinition, seed: int, n_trainees: int = 3,
                   n_events: int = 60, with_messages: bool = True) -> EventLog:
    """Arbitrary but reference-valid CTF log with per-actor secret markers
    in free-text payloads (for leak tests)."""
    rng = random.Random(seed)
    actors = [f"t{i}" for i in range(n_trainees)]
    participants = [Participant(a, "trainee") for a in actors]
    participants.append(Participant("sup-1", "supervisor"))
    participants.append(Participant("red-1", "sparring_partner"))
    participants.append(Participant("op-1", "operator"))
    run = TrainingRun(f"rnd-{seed}", defn.id, 1_700_000_000.0,
                      participants=tuple(participants))
    log = EventLog(run, defn)
    level_ids = [lvl.id for lvl in defn.scenario.levels]
    t = run.start_time
    for i in range(n_events):
        t += rng.uniform(0.5, 45.0)
        actor = rng.choice(actors)
        level = rng.choice(level_ids)
        roll = rng.random()
        if roll < 0.2:
            log.append(t, actor, LevelStarted(level))
        elif roll < 0.35:
            lvl = defn.level_by_id(level)
            if lvl.hints:
                hint = rng.choice(lvl.hints)
                log.append(t, actor, HintTaken(level, hint.id))
        elif roll < 0.55:
            log.append(t, actor, FlagSubmitted(level, rng.random() < 0.3))
        elif roll < 0.68:
            log.append(t, actor, LevelCompleted(level))
        elif roll < 0.76:
            log.append(t, actor, LevelSkipped(level))
        elif roll < 0.84:
            log.append(t, actor, SolutionDisplayed(level))
        elif roll < 0.92:
            log.append(t, actor, CommandEntered(f"SECRET-{actor}-cmd-{i}"))
        elif with_messages and roll < 0.96:
            other = rng.choice([a for a in actors if a != actor] or [actor])
            log.append(t, actor, MessageSent(other, f"SECRET-{actor}-msg-{i}"))
        elif with_messages:
            sender = rng.choice(["sup-1", "red-1"])
            log.append(t, sender, MessageSent(actor, f"note-{sender}-{i}"))
    return log
