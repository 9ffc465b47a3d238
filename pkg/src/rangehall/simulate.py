"""Seeded synthetic training runs for desk-scale testing of every feature.

Randomness comes from numpy's PCG64 bit generator, so identical
(definition, profiles, config) inputs reproduce the event log exactly.
Solve times are log-normal with median = level expected_duration x
(2 - skill) and shape 0.5; all behavioral knobs sit on the profile or
config with documented defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from numpy.random import PCG64, Generator

from .definition import TrainingDefinition
from .errors import (
    KindMismatchError,
    MissingTeamProfileError,
    TooManyParticipantsError,
    UnknownCategoryError,
)
from .events import (
    CommandEntered,
    EventLog,
    FlagSubmitted,
    HintTaken,
    LevelCompleted,
    LevelSkipped,
    LevelStarted,
    ManualScoring,
    MessageSent,
    NodeFailure,
    NodeMetric,
    NodeRecovery,
    Participant,
    Payload,
    QuestionnaireAnswered,
    ServiceProbe,
    SolutionDisplayed,
    TrainingRun,
)

DEFAULT_START_TIME = 1_700_000_000.0  # fixed wall-clock origin for reproducible logs

SOLVE_TIME_SIGMA = 0.5
WRONG_FLAG_RATE = 3.0  # mean wrong submissions per level at guess_propensity 1.0
COMMAND_RATE_PER_HOUR = 6.0
METRIC_INTERVAL_SEC = 300.0
OUTAGE_MEDIAN_MIN = 15.0
REVERT_PROBABILITY = 0.5
MIN_REMAINING_SEC = 30.0  # trainees stop starting levels below this budget
START_STAGGER_MAX_MIN = 5.0


@dataclass(frozen=True)
class TraineeProfile:
    """Behavioral knobs for one simulated trainee.

    base_solve_time (minutes) replaces the level's expected_duration as
    the solve-time scale when set; by default each level's own
    expected_duration is used.
    """

    actor_id: str
    skill: float = 0.5
    hint_propensity: float = 0.3
    guess_propensity: float = 0.2
    base_solve_time: float | None = None


@dataclass(frozen=True)
class SimulationConfig:
    seed: int = 1
    wall_duration: float = 120.0  # minutes
    probe_interval: float | None = None  # seconds; overrides every scored service
    team_profiles: dict = field(default_factory=dict)  # team_id -> defense_skill
    team_size: int = 4
    member_message_rate: float = 2.0  # messages/hour per member pair
    leader_rate_factor: float = 3.0  # leader pairs run this many times hotter
    start_time: float = DEFAULT_START_TIME


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


def _ts(x: float) -> float:
    return round(x, 3)


# --- CTF ----------------------------------------------------------------------


def simulate_ctf_run(defn: TrainingDefinition, profiles: list[TraineeProfile],
                     config: SimulationConfig) -> tuple[TrainingRun, EventLog]:
    """Simulate one CTF session: each trainee traverses levels in order,
    taking hints, guessing flags, and skipping levels that no longer fit
    the remaining wall time."""
    if defn.kind != "CTF":
        raise KindMismatchError(f"CTF simulation on a {defn.kind} definition")
    if not profiles:
        raise ValueError("at least one trainee profile required")
    if len(profiles) > defn.max_participants:
        raise TooManyParticipantsError(
            f"{len(profiles)} profiles exceed max_participants {defn.max_participants}")
    for p in profiles:
        _check_probability("skill", p.skill)
        _check_probability("hint_propensity", p.hint_propensity)
        _check_probability("guess_propensity", p.guess_propensity)
        if p.base_solve_time is not None and p.base_solve_time <= 0:
            raise ValueError("base_solve_time must be > 0")
    if config.wall_duration <= 0:
        raise ValueError("wall_duration must be > 0")

    rng = Generator(PCG64(config.seed))
    start = config.start_time
    wall_sec = config.wall_duration * 60.0

    participants = [Participant(p.actor_id, "trainee") for p in profiles]
    participants.append(Participant("sup-1", "supervisor"))
    run = TrainingRun(
        run_id=f"ctf-{defn.id}-s{config.seed}",
        definition_id=defn.id,
        start_time=start,
        participants=tuple(participants),
    )
    log = EventLog(run, defn)

    stream: list[tuple[float, str, Payload]] = []
    levels = sorted(defn.scenario.levels, key=lambda lvl: lvl.order)
    for profile in profiles:
        stream.extend(_trainee_stream(rng, profile, levels, defn, start, wall_sec))

    for ts, actor, payload in _merged(stream):
        log.append(ts, actor, payload)
    log.close(_ts(start + wall_sec))
    return log.run, log


def _trainee_stream(rng: Generator, profile: TraineeProfile, levels, defn,
                    start: float, wall_sec: float) -> list[tuple[float, str, Payload]]:
    actor = profile.actor_id
    deadline = start + wall_sec
    t = start + float(rng.uniform(0.0, min(START_STAGGER_MAX_MIN, defn.expected_total_duration
                                           * 0.05) * 60.0))
    out: list[tuple[float, str, Payload]] = []

    for level in levels:
        if t >= deadline - MIN_REMAINING_SEC:
            break
        scale = profile.base_solve_time if profile.base_solve_time is not None \
            else level.expected_duration
        median_min = scale * (2.0 - profile.skill)
        solve_sec = float(rng.lognormal(math.log(median_min), SOLVE_TIME_SIGMA)) * 60.0

        level_events: list[tuple[float, int, Payload]] = [(t, 0, LevelStarted(level.id))]
        fits = t + solve_sec <= deadline
        active_sec = solve_sec if fits else (deadline - t) * 0.5

        for hint in level.hints:
            if rng.random() < profile.hint_propensity:
                frac = float(rng.uniform(0.1, 0.8))
                level_events.append((t + frac * active_sec, 1, HintTaken(level.id, hint.id)))

        for _ in range(int(rng.poisson(WRONG_FLAG_RATE * profile.guess_propensity))):
            frac = float(rng.uniform(0.1, 0.95))
            level_events.append((t + frac * active_sec, 1, FlagSubmitted(level.id, False)))

        # Exploration chatter falls off with skill; a perfect trainee types nothing.
        cmd_rate = COMMAND_RATE_PER_HOUR * (1.0 - profile.skill)
        n_cmds = int(rng.poisson(cmd_rate * active_sec / 3600.0)) if cmd_rate > 0 else 0
        for i in range(n_cmds):
            frac = float(rng.uniform(0.05, 0.95))
            level_events.append((t + frac * active_sec, 1,
                                 CommandEntered(f"cmd-{actor}-{level.id}-{i}")))

        if fits:
            end = t + solve_sec
            level_events.append((end, 3, LevelCompleted(level.id)))
            t = min(end + float(rng.uniform(10.0, 60.0)), deadline)
        else:
            end = t + active_sec
            if rng.random() < 0.5 * profile.hint_propensity:
                # About-to-quit signature: burn remaining hints and peek at
                # the solution shortly before giving up.
                taken = {p.hint_id for _, _, p in level_events if isinstance(p, HintTaken)}
                quit_at = max(t, end - 120.0)
                step = (end - quit_at) / (len(level.hints) + 2)
                when = quit_at
                for hint in level.hints:
                    if hint.id not in taken:
                        when += step
                        level_events.append((when, 2, HintTaken(level.id, hint.id)))
                level_events.append((end - step if step > 0 else end, 2,
                                     SolutionDisplayed(level.id)))
            level_events.append((end, 3, LevelSkipped(level.id)))
            t = end

        level_events.sort(key=lambda item: (item[0], item[1]))
        out.extend((_ts(ts), actor, payload) for ts, rank, payload in level_events)

    for i, q in enumerate(defn.criteria.questionnaires):
        qid = str(q.get("id", f"questionnaire-{i}"))
        ts = min(t + float(rng.uniform(10.0, 120.0)), deadline)
        out.append((_ts(ts), actor, QuestionnaireAnswered(qid, {"completed": True})))
    return out


# --- CDX ----------------------------------------------------------------------


def simulate_cdx_run(defn: TrainingDefinition,
                     config: SimulationConfig) -> tuple[TrainingRun, EventLog]:
    """Simulate one CDX session: scheduled attacks resolve against team
    defense skill, successful attacks knock the target's services down for
    a drawn outage, probes tick every check interval, and teams chat with
    a designated leader."""
    if defn.kind != "CDX":
        raise KindMismatchError(f"CDX simulation on a {defn.kind} definition")
    if not config.team_profiles:
        raise MissingTeamProfileError("config.team_profiles must name at least one team")
    for team, skill in config.team_profiles.items():
        _check_probability(f"defense_skill[{team}]", skill)
    if config.wall_duration <= 0:
        raise ValueError("wall_duration must be > 0")

    rng = Generator(PCG64(config.seed))
    start = config.start_time
    wall_sec = config.wall_duration * 60.0
    end = start + wall_sec
    teams = sorted(config.team_profiles)

    node_team = assign_nodes_to_teams(defn, teams)
    for entry in defn.scenario.attack_plan:
        if entry.target not in node_team:
            raise MissingTeamProfileError(
                f"attack '{entry.id}' targets '{entry.target}', which no team defends")

    participants: list[Participant] = []
    members: dict[str, list[str]] = {}
    for team in teams:
        members[team] = [f"{team}-member-{i + 1}" for i in range(config.team_size)]
        participants.extend(Participant(m, "trainee", team) for m in members[team])
    participants.append(Participant("red-1", "sparring_partner"))
    participants.append(Participant("white-1", "supervisor"))
    participants.append(Participant("green-1", "operator"))
    run = TrainingRun(
        run_id=f"cdx-{defn.id}-s{config.seed}",
        definition_id=defn.id,
        start_time=start,
        participants=tuple(participants),
    )
    log = EventLog(run, defn)

    stream: list[tuple[float, str, Payload]] = []

    # 1. Attacks, outages, and revert requests, in plan order.
    manual_cats = defn.criteria.manual_penalty_categories
    outages: dict[str, list[tuple[float, float]]] = {}
    for entry in sorted(defn.scenario.attack_plan, key=lambda e: (e.scheduled_offset, e.id)):
        team = node_team[entry.target]
        ts = start + entry.scheduled_offset * 60.0
        success = bool(rng.random() < 1.0 - config.team_profiles[team])
        if entry.attack_type in manual_cats:
            category = entry.attack_type
        elif manual_cats:
            category = manual_cats[0]
        else:
            raise UnknownCategoryError(
                "definition declares no manual penalty category to record attack outcomes")
        stream.append((_ts(ts), "red-1", ManualScoring(
            issued_by="red-1",
            subject=team,
            category=category,
            points=-entry.penalty_points if success else 0,
            comment=f"{entry.attack_type} against {entry.target}: "
                    f"{'success' if success else 'defended'}",
            attack_id=entry.id,
            attack_outcome="success" if success else "failure",
        )))
        if success:
            outage_sec = float(rng.lognormal(math.log(OUTAGE_MEDIAN_MIN), 0.5)) * 60.0
            outage_sec = min(max(outage_sec, 120.0), end - ts)
            outages.setdefault(entry.target, []).append((ts, ts + outage_sec))
            stream.append((_ts(ts), "system", NodeFailure(entry.target)))
            if ts + outage_sec < end:
                stream.append((_ts(ts + outage_sec), "system", NodeRecovery(entry.target)))
            if rng.random() < REVERT_PROBABILITY:
                revert_ts = ts + float(rng.uniform(60.0, 600.0))
                if revert_ts < end:
                    stream.append((_ts(revert_ts), "white-1", ManualScoring(
                        issued_by="white-1",
                        subject=team,
                        category="revert",
                        points=-defn.criteria.revert_penalty,
                        comment=f"revert of {entry.target}",
                    )))

    def down_at(node_id: str, ts: float) -> bool:
        return any(t0 <= ts < t1 for t0, t1 in outages.get(node_id, ()))

    # 2. Service probes, one per check interval per scored service.
    for svc in defn.criteria.scored_services:
        interval = config.probe_interval if config.probe_interval is not None \
            else svc.check_interval
        ticks = math.floor(wall_sec / interval)
        for k in range(1, ticks + 1):
            ts = start + k * interval
            down = down_at(svc.node_id, ts)
            latency = 0.0 if down else round(float(rng.uniform(5.0, 50.0)), 1)
            stream.append((_ts(ts), "system",
                           ServiceProbe(svc.id, "down" if down else "up", latency)))

    # 3. Node metrics for utilization reporting; load rises during outages.
    for node in defn.scenario.topology.nodes:
        ticks = math.floor(wall_sec / METRIC_INTERVAL_SEC)
        for k in range(1, ticks + 1):
            ts = start + k * METRIC_INTERVAL_SEC
            bump = 30.0 if down_at(node.id, ts) else 0.0
            cpu = min(max(float(rng.normal(35.0, 15.0)) + bump, 0.0), 100.0)
            mem = min(max(float(rng.normal(50.0, 10.0)) + bump, 0.0), 100.0)
            stream.append((_ts(ts), "system",
                           NodeMetric(node.id, round(cpu, 1), round(mem, 1))))

    # 4. Team chatter: pairs involving the leader run leader_rate_factor hotter,
    # which is what communication centrality is meant to pick up.
    hours = config.wall_duration / 60.0
    for team in teams:
        actors = members[team]
        leader = actors[0]
        for i, a in enumerate(actors):
            for b in actors[i + 1:]:
                rate = config.member_message_rate
                if leader in (a, b):
                    rate *= config.leader_rate_factor
                for sender, receiver in ((a, b), (b, a)):
                    count = int(rng.poisson(rate * hours))
                    for n in range(count):
                        ts = start + float(rng.uniform(0.0, wall_sec))
                        stream.append((_ts(ts), sender, MessageSent(
                            receiver, f"msg-{sender}-{n}")))

    # 5. Commands typed by blue-team members.
    for team in teams:
        for actor in members[team]:
            count = int(rng.poisson(COMMAND_RATE_PER_HOUR * hours))
            for n in range(count):
                ts = start + float(rng.uniform(0.0, wall_sec))
                stream.append((_ts(ts), actor, CommandEntered(f"cmd-{actor}-{n}")))

    for ts, actor, payload in _merged(stream):
        log.append(ts, actor, payload)
    log.close(_ts(end))
    return log.run, log


def assign_nodes_to_teams(defn: TrainingDefinition, teams: list[str]) -> dict[str, str]:
    """Deterministic node ownership: non-attacker nodes, sorted by id, are
    split into contiguous blocks, one per team in sorted order."""
    defendable = sorted(n.id for n in defn.scenario.topology.nodes if n.role != "attacker")
    if not teams:
        return {}
    assignment: dict[str, str] = {}
    n, k = len(defendable), len(teams)
    base, extra = divmod(n, k)
    idx = 0
    for i, team in enumerate(teams):
        size = base + (1 if i < extra else 0)
        for node_id in defendable[idx:idx + size]:
            assignment[node_id] = team
        idx += size
    return assignment


def team_events(log: EventLog, node_team: dict[str, str], team_id: str) -> list:
    """The slice of a CDX log that scores against one team: probes on the
    team's nodes plus manual events naming the team as subject."""
    defn = log.definition
    out = []
    for ev in log.events():
        p = ev.payload
        if isinstance(p, ServiceProbe) and defn is not None:
            svc = defn.service_by_id(p.service_id)
            if svc is not None and node_team.get(svc.node_id) == team_id:
                out.append(ev)
        elif isinstance(p, ManualScoring) and p.subject == team_id:
            out.append(ev)
    return out


def _merged(stream: list[tuple[float, str, Payload]]) -> list[tuple[float, str, Payload]]:
    """Stable merge by timestamp; generation order breaks ties."""
    indexed = list(enumerate(stream))
    indexed.sort(key=lambda item: (item[1][0], item[0]))
    return [item for _, item in indexed]
