"""Role-scoped view projection and live update routing.

A view is a pure function of the event prefix at `as_of`, keyed solely by
the viewer's role. Trainee views deliberately withhold other trainees'
events and the hidden attack plan; sparring views never carry trainee
command content. publish_update names the minimal set of (role, actor)
channels whose view changes when one event lands.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from .analytics import TroubleRules, detect_trouble
from .definition import TrainingDefinition
from .errors import (
    NotAParticipantError,
    RoleForbiddenError,
    UnknownActorError,
)
from .events import (
    EventEnvelope,
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
    ServiceProbe,
    SolutionDisplayed,
    TrainingRun,
    derive_level_intervals,
    is_user_action,
    payload_kind,
)
from .scoring import (
    ScoreTransaction,
    Scoreboard,
    build_scoreboard,
    score_cdx_run,
    score_ctf_run,
)
from .simulate import assign_nodes_to_teams

# Table 1 puts the white team under both sparring partner and supervisor,
# so those two roles may request each other's view.
_COMPATIBLE_ROLES = {
    "trainee": {"trainee"},
    "sparring_partner": {"sparring_partner", "supervisor"},
    "supervisor": {"supervisor", "sparring_partner"},
    "operator": {"operator"},
}

Channel = tuple[str, str]  # (role, actor_id)


@dataclass(frozen=True)
class RoleView:
    viewer: tuple[str, str]  # (actor_id, role)
    run_id: str
    as_of: float
    kind: str  # "trainee" | "supervisor" | "sparring" | "operator"
    payload: dict  # JSON-ready view content


@dataclass(frozen=True)
class AttackPlanState:
    attack_id: str
    runtime_state: str  # "inactive" | "ongoing" | "completed"
    outcome: str | None  # present iff completed
    comments: tuple[str, ...]


def run_transactions(defn: TrainingDefinition, run: TrainingRun,
                     events: list[EventEnvelope]) -> list[ScoreTransaction]:
    """All subjects' transactions for either kind, in event order."""
    if defn.kind == "CTF":
        return score_ctf_run(defn, events)
    teams = sorted(run.team_ids())
    node_team = assign_nodes_to_teams(defn, teams)
    out: list[ScoreTransaction] = []
    for team in teams:
        slice_ = _team_slice(defn, events, node_team, team)
        out.extend(score_cdx_run(defn, slice_, team))
    out.sort(key=lambda tx: (tx.timestamp, tx.source_seq))
    return out


def _team_slice(defn, events, node_team, team_id):
    out = []
    for ev in events:
        p = ev.payload
        if isinstance(p, ServiceProbe):
            svc = defn.service_by_id(p.service_id)
            if svc is not None and node_team.get(svc.node_id) == team_id:
                out.append(ev)
        elif isinstance(p, ManualScoring) and p.subject == team_id:
            out.append(ev)
    return out


# --- projection ----------------------------------------------------------------


def project_role_view(log: EventLog, viewer: tuple[str, str], as_of: float) -> RoleView:
    """Project the view a (actor, role) pair sees at `as_of`.

    Reflects exactly the events with timestamp <= as_of. Raises
    NotAParticipantError for unregistered viewers and RoleForbiddenError
    when the registered role does not cover the requested one.
    """
    actor_id, role = viewer
    defn = log.definition
    if defn is None:
        raise ValueError("projection needs the run's definition on the log")
    participant = log.run.participant(actor_id)
    if participant is None:
        raise NotAParticipantError(f"'{actor_id}' is not a participant of "
                                   f"run '{log.run.run_id}'")
    if role not in _COMPATIBLE_ROLES.get(participant.role, ()):
        raise RoleForbiddenError(
            f"'{actor_id}' is registered as {participant.role} and may not "
            f"request the {role} view")

    visible = [ev for ev in log.events() if ev.timestamp <= as_of]
    if role == "trainee":
        kind, payload = "trainee", _trainee_payload(defn, log, participant, visible, as_of)
    elif role == "supervisor":
        kind, payload = "supervisor", _supervisor_payload(defn, log, visible, as_of)
    elif role == "sparring_partner":
        kind, payload = "sparring", _sparring_payload(defn, log, visible, as_of)
    elif role == "operator":
        kind, payload = "operator", _operator_payload(defn, visible)
    else:
        raise RoleForbiddenError(f"unknown role '{role}'")
    return RoleView(viewer=viewer, run_id=log.run.run_id, as_of=as_of,
                    kind=kind, payload=payload)


def _trainee_payload(defn, log, participant: Participant, visible, as_of) -> dict:
    actor = participant.actor_id
    own = [ev for ev in visible if ev.actor_id == actor]

    current_level = None
    open_levels: dict[str, float] = {}
    hints_taken = []
    solutions = []
    for ev in own:
        p = ev.payload
        if isinstance(p, LevelStarted):
            open_levels[p.level_id] = ev.timestamp
        elif isinstance(p, (LevelCompleted, LevelSkipped)):
            open_levels.pop(p.level_id, None)
        elif isinstance(p, HintTaken):
            hint = defn.hint_by_id(p.level_id, p.hint_id)
            hints_taken.append({
                "level_id": p.level_id,
                "hint_id": p.hint_id,
                "text": hint.text if hint else "",
                "penalty_points": hint.penalty_points if hint else 0,
            })
        elif isinstance(p, SolutionDisplayed):
            level = defn.level_by_id(p.level_id)
            solutions.append({
                "level_id": p.level_id,
                "solution_text": level.solution_text if level else "",
            })
    if open_levels:
        level_id = max(open_levels, key=lambda lid: open_levels[lid])
        level = defn.level_by_id(level_id)
        if level is not None:
            current_level = {"level_id": level.id, "title": level.title,
                             "task_text": level.task_text}

    transactions = run_transactions(defn, log.run, visible)
    subject = actor if defn.kind == "CTF" else (participant.team_id or actor)
    own_tx = [tx for tx in transactions if tx.subject == subject]
    timeline = []
    total = 0
    for tx in own_tx:
        total += tx.delta
        timeline.append([tx.timestamp, total])
    board = build_scoreboard(transactions)
    rank = board.rank(subject)
    cohort = len(log.run.trainees()) if defn.kind == "CTF" else len(log.run.team_ids())

    # Messages surface only from organizing roles (interventions, requests);
    # trainee-to-trainee chat is transport, never part of another trainee's view.
    messages = []
    for ev in visible:
        if not isinstance(ev.payload, MessageSent) or ev.payload.to_actor_id != actor:
            continue
        sender = log.run.participant(ev.actor_id)
        if sender is not None and sender.role == "trainee":
            continue
        messages.append({"from": ev.actor_id, "text": ev.payload.text,
                         "timestamp": ev.timestamp})

    intervals = [
        {"level_id": iv.level_id, "start": iv.start,
         "end": iv.end if iv.end is not None and iv.end <= as_of else None,
         "outcome": iv.outcome}
        for iv in _intervals_at(log, actor, as_of)
    ]

    if defn.kind == "CDX":
        node_team = assign_nodes_to_teams(defn, sorted(log.run.team_ids()))
        allowed = {nid for nid, team in node_team.items() if team == participant.team_id}
        show_vulnerabilities = False
    else:
        allowed = defn.scenario.topology.node_ids()
        show_vulnerabilities = True
    topology = _topology_glyphs(defn, visible, allowed, show_vulnerabilities)

    return {
        "actor_id": actor,
        "current_level": current_level,
        "hints_taken": hints_taken,
        "solutions_displayed": solutions,
        "intervals": intervals,
        "timeline": timeline,
        "scoreboard_lite": {"rank": rank, "total": total, "cohort_size": cohort},
        "messages": messages,
        "topology": topology,
    }


def _intervals_at(log, actor, as_of):
    """Level intervals computed over the event prefix at as_of."""
    trimmed = EventLog(log.run, log.definition)
    trimmed._events = [ev for ev in log.events() if ev.timestamp <= as_of]
    return derive_level_intervals(trimmed, actor)


def _supervisor_payload(defn, log, visible, as_of) -> dict:
    transactions = run_transactions(defn, log.run, visible)
    board = build_scoreboard(transactions)
    rows = []
    for trainee in log.run.trainees():
        actor = trainee.actor_id
        own = [ev for ev in visible if ev.actor_id == actor]
        intervals = []
        for iv in _intervals_at(log, actor, as_of):
            level = defn.level_by_id(iv.level_id)
            intervals.append({
                "level_id": iv.level_id,
                "start": iv.start,
                "end": iv.end,
                "outcome": iv.outcome,
                "expected_end": iv.start + level.expected_duration * 60.0
                if level is not None else None,
            })
        current = None
        completed = skipped = hints = wrong = 0
        dots = []
        open_levels: dict[str, float] = {}
        for ev in own:
            p = ev.payload
            if not is_user_action(p):
                continue
            dots.append({"timestamp": ev.timestamp, "kind": payload_kind(p),
                         "level_id": getattr(p, "level_id", None)})
            if isinstance(p, LevelStarted):
                open_levels[p.level_id] = ev.timestamp
            elif isinstance(p, LevelCompleted):
                open_levels.pop(p.level_id, None)
                completed += 1
            elif isinstance(p, LevelSkipped):
                open_levels.pop(p.level_id, None)
                skipped += 1
            elif isinstance(p, HintTaken):
                hints += 1
            elif isinstance(p, FlagSubmitted) and not p.correct:
                wrong += 1
        if open_levels:
            current = max(open_levels, key=lambda lid: open_levels[lid])
        subject = actor if defn.kind == "CTF" else trainee.team_id
        row_entry = board.row(subject) if subject else None
        rows.append({
            "actor_id": actor,
            "team_id": trainee.team_id,
            "current_level_id": current,
            "levels_completed": completed,
            "levels_skipped": skipped,
            "hints_taken": hints,
            "wrong_flags": wrong,
            "total": row_entry.total if row_entry else 0,
            "intervals": intervals,
            "event_dots": dots,
        })
    alerts = [
        {"actor_id": a.actor_id, "level_id": a.level_id, "kind": a.kind,
         "evidence": a.evidence, "raised_at": a.raised_at}
        for a in detect_trouble(log, as_of, TroubleRules())
    ]
    return {
        "run": {"run_id": log.run.run_id, "start_time": log.run.start_time,
                "end_time": log.run.end_time},
        "rows": rows,
        "alerts": alerts,
        "scoreboard": _board_dict(board),
    }


def _sparring_payload(defn, log, visible, as_of) -> dict:
    states = attack_plan_state(defn, log.run, visible, as_of)
    plan = []
    for entry in sorted(defn.scenario.attack_plan, key=lambda e: (e.scheduled_offset, e.id)):
        st = states[entry.id]
        plan.append({
            "attack_id": entry.id,
            "attack_type": entry.attack_type,
            "target": entry.target,
            "scheduled_offset": entry.scheduled_offset,
            "penalty_points": entry.penalty_points,
            "details": entry.details,
            "runtime_state": st.runtime_state,
            "outcome": st.outcome,
            "comments": list(st.comments),
        })
    return {"attack_plan": plan}


def attack_plan_state(defn, run, visible, as_of) -> dict[str, AttackPlanState]:
    """completed iff a manual event names the attack; ongoing iff its
    offset has passed without an outcome; inactive otherwise."""
    outcomes: dict[str, tuple[str, list[str]]] = {}
    for ev in visible:
        p = ev.payload
        if isinstance(p, ManualScoring) and p.attack_id is not None:
            outcome, comments = outcomes.get(p.attack_id, (p.attack_outcome, []))
            if p.comment:
                comments = comments + [p.comment]
            outcomes[p.attack_id] = (p.attack_outcome or outcome, comments)
    out = {}
    for entry in defn.scenario.attack_plan:
        if entry.id in outcomes:
            outcome, comments = outcomes[entry.id]
            out[entry.id] = AttackPlanState(entry.id, "completed", outcome, tuple(comments))
        elif as_of >= run.start_time + entry.scheduled_offset * 60.0:
            out[entry.id] = AttackPlanState(entry.id, "ongoing", None, ())
        else:
            out[entry.id] = AttackPlanState(entry.id, "inactive", None, ())
    return out


def _operator_payload(defn, visible) -> dict:
    last_probe: dict[str, tuple[str, float]] = {}
    counts: dict[str, list[int]] = {}
    node_down: dict[str, bool] = {}
    failure_count: dict[str, int] = {}
    last_metric: dict[str, tuple[float, float]] = {}
    for ev in visible:
        p = ev.payload
        if isinstance(p, ServiceProbe):
            last_probe[p.service_id] = (p.status, p.latency_ms)
            c = counts.setdefault(p.service_id, [0, 0])
            c[0 if p.status == "up" else 1] += 1
        elif isinstance(p, NodeFailure):
            node_down[p.node_id] = True
            failure_count[p.node_id] = failure_count.get(p.node_id, 0) + 1
        elif isinstance(p, NodeRecovery):
            node_down[p.node_id] = False
        elif isinstance(p, NodeMetric):
            last_metric[p.node_id] = (p.cpu_percent, p.memory_percent)

    services = []
    for svc in defn.criteria.scored_services:
        status, latency = last_probe.get(svc.id, ("unknown", None))
        up, down = counts.get(svc.id, [0, 0])
        services.append({
            "service_id": svc.id,
            "service_name": svc.service_name,
            "node_id": svc.node_id,
            "status": status,
            "last_latency_ms": latency,
            "up_count": up,
            "down_count": down,
        })
    nodes = []
    for node in defn.scenario.topology.nodes:
        cpu, mem = last_metric.get(node.id, (None, None))
        nodes.append({
            "node_id": node.id,
            "role": node.role,
            "down": node_down.get(node.id, False),
            "failure_count": failure_count.get(node.id, 0),
            "cpu_percent": cpu,
            "memory_percent": mem,
        })
    return {"services": services, "nodes": nodes}


def _topology_glyphs(defn, visible, allowed_nodes: set[str],
                     show_vulnerabilities: bool) -> dict:
    service_status: dict[str, str] = {}
    node_down: dict[str, bool] = {}
    for ev in visible:
        p = ev.payload
        if isinstance(p, ServiceProbe):
            service_status[p.service_id] = p.status
        elif isinstance(p, NodeFailure):
            node_down[p.node_id] = True
        elif isinstance(p, NodeRecovery):
            node_down[p.node_id] = False

    vulns: dict[str, list[str]] = {}
    if show_vulnerabilities:
        for node_id, label in defn.scenario.vulnerabilities:
            vulns.setdefault(node_id, []).append(label)

    nodes = []
    for node in defn.scenario.topology.nodes:
        if node.id not in allowed_nodes:
            continue
        services = []
        for svc in defn.criteria.scored_services:
            if svc.node_id == node.id:
                services.append({
                    "service_id": svc.id,
                    "name": svc.service_name,
                    "status": service_status.get(svc.id, "unknown"),
                })
        nodes.append({
            "node_id": node.id,
            "role_glyph": node.role,
            "down": node_down.get(node.id, False),
            "services": services,
            "vulnerabilities": vulns.get(node.id, []),
        })
    links = [[a, b] for a, b in defn.scenario.topology.links
             if a in allowed_nodes and b in allowed_nodes]
    return {"nodes": nodes, "links": links}


def _board_dict(board: Scoreboard) -> list[dict]:
    return [
        {"subject": r.subject, "total": r.total, "per_category": dict(r.per_category)}
        for r in board.rows
    ]


# --- update routing -------------------------------------------------------------


def publish_update(log: EventLog, event: EventEnvelope) -> set[Channel]:
    """Channels whose RoleView changes because of `event`.

    The event must already be appended. Rule-based per payload kind; the
    score-sensitive channels (timelines, lite boards, full scoreboard)
    come from diffing transactions with and without the event, which keeps
    the set minimal even for zero-delta transactions.
    """
    defn = log.definition
    run = log.run
    if defn is None:
        raise ValueError("publish_update needs the run's definition on the log")
    if run.participant(event.actor_id) is None and event.actor_id != "system":
        raise UnknownActorError(f"unknown event actor '{event.actor_id}'")

    as_of = event.timestamp
    visible_after = [ev for ev in log.events() if ev.timestamp <= as_of]
    visible_before = [ev for ev in visible_after if ev.seq != event.seq]

    supervisors = [p for p in run.participants if p.role == "supervisor"]
    sparring = [p for p in run.participants if p.role == "sparring_partner"]
    operators = [p for p in run.participants if p.role == "operator"]
    trainees = run.trainees()

    tx_before = run_transactions(defn, run, visible_before)
    tx_after = run_transactions(defn, run, visible_after)
    board_before = build_scoreboard(tx_before)
    board_after = build_scoreboard(tx_after)
    board_changed = _board_dict(board_before) != _board_dict(board_after)
    rank_changed = _changed_rank_or_total(board_before, board_after)
    tx_changed = _subjects_with_new_transactions(tx_before, tx_after)

    channels: set[Channel] = set()

    def add_trainee(actor_id: str) -> None:
        p = run.participant(actor_id)
        if p is not None and p.role == "trainee":
            channels.add(("trainee", actor_id))

    def add_all(role: str, group) -> None:
        channels.update((role, p.actor_id) for p in group)

    p = event.payload
    actor = run.participant(event.actor_id)
    actor_is_trainee = actor is not None and actor.role == "trainee"

    if is_user_action(p):
        if actor_is_trainee:
            add_all("supervisor", supervisors)  # event dots on the overview row
        if isinstance(p, (LevelStarted, LevelCompleted, LevelSkipped, HintTaken,
                          SolutionDisplayed)):
            add_trainee(event.actor_id)
        if isinstance(p, MessageSent) and not actor_is_trainee:
            add_trainee(p.to_actor_id)
    elif isinstance(p, ManualScoring):
        if p.attack_id is not None and _attack_states_changed(defn, run, visible_before,
                                                              visible_after, as_of):
            add_all("sparring_partner", sparring)
    elif isinstance(p, ServiceProbe):
        add_all("operator", operators)  # probe counters always move
        svc = defn.service_by_id(p.service_id)
        if svc is not None and _probe_status_changed(visible_before, p):
            for t in _trainees_seeing_node(defn, run, trainees, svc.node_id):
                add_trainee(t.actor_id)
    elif isinstance(p, NodeMetric):
        if _metric_changed(visible_before, p):
            add_all("operator", operators)
    elif isinstance(p, NodeFailure):
        add_all("operator", operators)  # failure counter always moves
        if _down_state_changed(visible_before, p):
            for t in _trainees_seeing_node(defn, run, trainees, p.node_id):
                add_trainee(t.actor_id)
    elif isinstance(p, NodeRecovery):
        if _down_state_changed(visible_before, p):
            add_all("operator", operators)
            for t in _trainees_seeing_node(defn, run, trainees, p.node_id):
                add_trainee(t.actor_id)

    # Timelines grow with every new transaction; lite boards move with rank
    # or total; the supervisor scoreboard with any row change.
    for subject in tx_changed | rank_changed:
        if defn.kind == "CTF":
            add_trainee(subject)
        else:
            for t in trainees:
                if t.team_id == subject:
                    add_trainee(t.actor_id)
    if board_changed:
        add_all("supervisor", supervisors)
    return channels


def _changed_rank_or_total(before: Scoreboard, after: Scoreboard) -> set[str]:
    def signature(board: Scoreboard) -> dict[str, tuple[int | None, int]]:
        return {r.subject: (board.rank(r.subject), r.total) for r in board.rows}

    sig_a, sig_b = signature(before), signature(after)
    changed = set()
    for subject in set(sig_a) | set(sig_b):
        if sig_a.get(subject) != sig_b.get(subject):
            changed.add(subject)
    return changed


def _subjects_with_new_transactions(before: list[ScoreTransaction],
                                    after: list[ScoreTransaction]) -> set[str]:
    def per_subject(txs):
        acc: dict[str, list] = {}
        for tx in txs:
            acc.setdefault(tx.subject, []).append(tx)
        return acc

    a, b = per_subject(before), per_subject(after)
    return {s for s in set(a) | set(b) if a.get(s, []) != b.get(s, [])}


def _attack_states_changed(defn, run, visible_before, visible_after, as_of) -> bool:
    return attack_plan_state(defn, run, visible_before, as_of) \
        != attack_plan_state(defn, run, visible_after, as_of)


def _metric_changed(visible_before, metric: NodeMetric) -> bool:
    last = None
    for ev in visible_before:
        q = ev.payload
        if isinstance(q, NodeMetric) and q.node_id == metric.node_id:
            last = (q.cpu_percent, q.memory_percent)
    return last != (metric.cpu_percent, metric.memory_percent)


def _probe_status_changed(visible_before, probe: ServiceProbe) -> bool:
    last = "unknown"
    for ev in visible_before:
        q = ev.payload
        if isinstance(q, ServiceProbe) and q.service_id == probe.service_id:
            last = q.status
    return last != probe.status


def _down_state_changed(visible_before, payload) -> bool:
    down = False
    for ev in visible_before:
        q = ev.payload
        if isinstance(q, NodeFailure) and q.node_id == payload.node_id:
            down = True
        elif isinstance(q, NodeRecovery) and q.node_id == payload.node_id:
            down = False
    return down != isinstance(payload, NodeFailure)


def _trainees_seeing_node(defn, run, trainees, node_id: str):
    if defn.kind == "CTF":
        return list(trainees)
    node_team = assign_nodes_to_teams(defn, sorted(run.team_ids()))
    team = node_team.get(node_id)
    return [t for t in trainees if t.team_id == team]


# --- run registry (shared by the HTTP server and CLI) -----------------------------


@dataclass
class RunHandle:
    log: EventLog
    definition: TrainingDefinition
    tokens: dict  # token -> actor_id


class RunRegistry:
    """In-memory run store with per-participant bearer tokens."""

    def __init__(self):
        self._runs: dict[str, RunHandle] = {}

    def create(self, defn: TrainingDefinition, run: TrainingRun) -> RunHandle:
        log = EventLog(run, defn)
        tokens = {secrets.token_hex(16): p.actor_id for p in run.participants}
        handle = RunHandle(log=log, definition=defn, tokens=tokens)
        self._runs[run.run_id] = handle
        return handle

    def adopt(self, defn: TrainingDefinition, log: EventLog) -> RunHandle:
        tokens = {secrets.token_hex(16): p.actor_id for p in log.run.participants}
        handle = RunHandle(log=log, definition=defn, tokens=tokens)
        self._runs[log.run.run_id] = handle
        return handle

    def get(self, run_id: str) -> RunHandle | None:
        return self._runs.get(run_id)

    def run_ids(self) -> list[str]:
        return sorted(self._runs)

    def actor_for_token(self, run_id: str, token: str) -> str | None:
        handle = self._runs.get(run_id)
        if handle is None:
            return None
        return handle.tokens.get(token)
