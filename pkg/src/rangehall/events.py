"""Append-only, totally ordered event log per training run.

The server-assigned seq is the ordering authority; client timestamps are
flagged when skewed but never reordered. One JSON Lines file per run is
the interchange contract: the first line is a run-header record, each
following line one event record with field names matching the types here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

from .definition import TrainingDefinition, canonical_json
from .errors import (
    RunClosedError,
    UnknownActorError,
    UnknownReferenceError,
    UnknownRunError,
)

ROLES = ("trainee", "sparring_partner", "supervisor", "operator")

SYSTEM_ACTOR = "system"

DEFAULT_CLOCK_SKEW_TOLERANCE = 5.0  # seconds


# --- run metadata -----------------------------------------------------------


@dataclass(frozen=True)
class Participant:
    actor_id: str
    role: str  # one of ROLES
    team_id: str | None = None


@dataclass(frozen=True)
class TrainingRun:
    run_id: str
    definition_id: str
    start_time: float  # unix seconds
    end_time: float | None = None
    participants: tuple[Participant, ...] = ()

    def participant(self, actor_id: str) -> Participant | None:
        for p in self.participants:
            if p.actor_id == actor_id:
                return p
        return None

    def trainees(self) -> tuple[Participant, ...]:
        return tuple(p for p in self.participants if p.role == "trainee")

    def team_ids(self) -> tuple[str, ...]:
        seen: list[str] = []
        for p in self.participants:
            if p.team_id is not None and p.team_id not in seen:
                seen.append(p.team_id)
        return tuple(seen)


# --- event payloads ---------------------------------------------------------
#
# One small frozen dataclass per payload kind; the class name is the wire
# `kind` discriminator.


@dataclass(frozen=True)
class LevelStarted:
    level_id: str


@dataclass(frozen=True)
class HintTaken:
    level_id: str
    hint_id: str


@dataclass(frozen=True)
class FlagSubmitted:
    level_id: str
    correct: bool


@dataclass(frozen=True)
class LevelCompleted:
    level_id: str


@dataclass(frozen=True)
class LevelSkipped:
    level_id: str


@dataclass(frozen=True)
class SolutionDisplayed:
    level_id: str


@dataclass(frozen=True)
class CommandEntered:
    text: str


@dataclass(frozen=True)
class MessageSent:
    to_actor_id: str
    text: str


@dataclass(frozen=True)
class QuestionnaireAnswered:
    questionnaire_id: str
    answers: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ServiceProbe:
    service_id: str
    status: str  # "up" | "down"
    latency_ms: float = 0.0


@dataclass(frozen=True)
class NodeMetric:
    node_id: str
    cpu_percent: float
    memory_percent: float


@dataclass(frozen=True)
class NodeFailure:
    node_id: str


@dataclass(frozen=True)
class NodeRecovery:
    node_id: str


@dataclass(frozen=True)
class LinkThroughput:
    link: tuple[str, str]
    bytes_per_sec: float


@dataclass(frozen=True)
class ManualScoring:
    issued_by: str  # actor with role sparring_partner or supervisor
    subject: str  # team_id or actor_id
    category: str  # one of criteria.manual_penalty_categories, or "revert"
    points: int
    comment: str = ""
    attack_id: str | None = None
    attack_outcome: str | None = None  # "success" | "failure", iff attack_id set


USER_ACTION_TYPES = (LevelStarted, HintTaken, FlagSubmitted, LevelCompleted, LevelSkipped,
                     SolutionDisplayed, CommandEntered, MessageSent, QuestionnaireAnswered)
INFRASTRUCTURE_TYPES = (ServiceProbe, NodeMetric, NodeFailure, NodeRecovery, LinkThroughput)

_PAYLOAD_TYPES = {cls.__name__: cls for cls in (*USER_ACTION_TYPES, *INFRASTRUCTURE_TYPES,
                                                ManualScoring)}

Payload = (LevelStarted | HintTaken | FlagSubmitted | LevelCompleted | LevelSkipped
           | SolutionDisplayed | CommandEntered | MessageSent | QuestionnaireAnswered
           | ServiceProbe | NodeMetric | NodeFailure | NodeRecovery | LinkThroughput
           | ManualScoring)


def payload_kind(payload: Payload) -> str:
    return type(payload).__name__


def is_user_action(payload: Payload) -> bool:
    return isinstance(payload, USER_ACTION_TYPES)


def is_infrastructure(payload: Payload) -> bool:
    return isinstance(payload, INFRASTRUCTURE_TYPES)


def payload_to_dict(payload: Payload) -> dict:
    out: dict = {"kind": payload_kind(payload)}
    for f in fields(payload):
        value = getattr(payload, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def payload_from_dict(data: dict) -> Payload:
    data = dict(data)
    kind = data.pop("kind", None)
    cls = _PAYLOAD_TYPES.get(kind)
    if cls is None:
        raise ValueError(f"unknown payload kind '{kind}'")
    if cls is LinkThroughput and isinstance(data.get("link"), list):
        data["link"] = tuple(data["link"])
    return cls(**data)


# --- envelope & log ---------------------------------------------------------


@dataclass(frozen=True)
class EventEnvelope:
    run_id: str
    seq: int
    timestamp: float
    actor_id: str  # participant actor_id or "system"
    payload: Payload
    clock_skew: bool = False  # timestamp regressed past tolerance; kept in place


class EventLog:
    """Per-run append-only log. Single writer, any number of readers.

    When a definition is supplied, appends validate actor and payload
    references; raw logs read back from disk may omit it.
    """

    def __init__(self, run: TrainingRun, definition: TrainingDefinition | None = None,
                 clock_skew_tolerance: float = DEFAULT_CLOCK_SKEW_TOLERANCE):
        self._run = run
        self._definition = definition
        self._tolerance = clock_skew_tolerance
        self._events: list[EventEnvelope] = []

    @property
    def run(self) -> TrainingRun:
        return self._run

    @property
    def definition(self) -> TrainingDefinition | None:
        return self._definition

    def __len__(self) -> int:
        return len(self._events)

    def events(self) -> tuple[EventEnvelope, ...]:
        return tuple(self._events)

    def append(self, timestamp: float, actor_id: str, payload: Payload) -> EventEnvelope:
        """Assign the next seq and durably record the event.

        Raises RunClosedError on an ended run, UnknownActorError for
        unregistered actors, UnknownReferenceError for ids that do not
        resolve against the run's definition. A timestamp more than the
        configured tolerance behind its predecessor is accepted but
        flagged, never reordered.
        """
        if self._run.end_time is not None:
            raise RunClosedError(f"run '{self._run.run_id}' already ended")
        if actor_id != SYSTEM_ACTOR and self._run.participant(actor_id) is None:
            raise UnknownActorError(f"'{actor_id}' is not a participant of run "
                                    f"'{self._run.run_id}'")
        self._check_references(actor_id, payload)

        skew = bool(self._events) and timestamp < self._events[-1].timestamp - self._tolerance
        envelope = EventEnvelope(
            run_id=self._run.run_id,
            seq=len(self._events) + 1,
            timestamp=timestamp,
            actor_id=actor_id,
            payload=payload,
            clock_skew=skew,
        )
        self._events.append(envelope)
        return envelope

    def close(self, end_time: float) -> TrainingRun:
        if self._run.end_time is not None:
            raise RunClosedError(f"run '{self._run.run_id}' already ended")
        if end_time < self._run.start_time:
            raise ValueError("end_time must be >= start_time")
        self._run = replace(self._run, end_time=end_time)
        return self._run

    def read(self, actors: set[str] | None = None, kinds: set[str] | None = None,
             window: tuple[float, float] | None = None) -> list[EventEnvelope]:
        """Filtered read in seq order. The time window is half-open [t0, t1)."""
        out = []
        for ev in self._events:
            if actors is not None and ev.actor_id not in actors:
                continue
            if kinds is not None and payload_kind(ev.payload) not in kinds:
                continue
            if window is not None and not (window[0] <= ev.timestamp < window[1]):
                continue
            out.append(ev)
        return out

    def _check_references(self, actor_id: str, payload: Payload) -> None:
        defn = self._definition
        if defn is None:
            return
        if isinstance(payload, (LevelStarted, LevelCompleted, LevelSkipped, SolutionDisplayed,
                                FlagSubmitted)):
            if defn.level_by_id(payload.level_id) is None:
                raise UnknownReferenceError(f"unknown level '{payload.level_id}'")
        elif isinstance(payload, HintTaken):
            if defn.hint_by_id(payload.level_id, payload.hint_id) is None:
                raise UnknownReferenceError(
                    f"unknown hint '{payload.hint_id}' in level '{payload.level_id}'")
        elif isinstance(payload, MessageSent):
            if (payload.to_actor_id != SYSTEM_ACTOR
                    and self._run.participant(payload.to_actor_id) is None):
                raise UnknownReferenceError(f"unknown recipient '{payload.to_actor_id}'")
        elif isinstance(payload, ServiceProbe):
            if defn.service_by_id(payload.service_id) is None:
                raise UnknownReferenceError(f"unknown scored service '{payload.service_id}'")
        elif isinstance(payload, (NodeMetric, NodeFailure, NodeRecovery)):
            if payload.node_id not in defn.scenario.topology.node_ids():
                raise UnknownReferenceError(f"unknown node '{payload.node_id}'")
        elif isinstance(payload, ManualScoring):
            issuer = self._run.participant(payload.issued_by)
            if issuer is None:
                raise UnknownActorError(f"unknown issuer '{payload.issued_by}'")
            if issuer.role not in ("sparring_partner", "supervisor"):
                raise UnknownActorError(
                    f"'{payload.issued_by}' ({issuer.role}) may not issue manual scores")
            known = set(defn.criteria.manual_penalty_categories) | {"revert"}
            if payload.category not in known:
                raise UnknownReferenceError(f"unknown manual category '{payload.category}'")
            if (payload.attack_id is None) != (payload.attack_outcome is None):
                raise UnknownReferenceError("attack_outcome present iff attack_id present")
            if payload.attack_id is not None:
                if all(e.id != payload.attack_id for e in defn.scenario.attack_plan):
                    raise UnknownReferenceError(f"unknown attack id '{payload.attack_id}'")


# --- level intervals --------------------------------------------------------


@dataclass(frozen=True)
class LevelInterval:
    level_id: str
    start: float
    end: float | None
    outcome: str  # "completed" | "skipped" | "in_progress"


def derive_level_intervals(log: EventLog, actor_id: str) -> list[LevelInterval]:
    """Exactly one interval per LevelStarted, ended by the matching
    terminal event (the most recent open start of that level).

    An unmatched start yields an open in_progress interval. Output is
    ordered by start time, which for sequential play matches level order.
    """
    participant = log.run.participant(actor_id)
    if participant is None:
        raise UnknownActorError(f"'{actor_id}' is not a participant of run '{log.run.run_id}'")

    intervals: list[LevelInterval] = []
    open_starts: dict[str, list[float]] = {}
    for ev in log.read(actors={actor_id}):
        p = ev.payload
        if isinstance(p, LevelStarted):
            open_starts.setdefault(p.level_id, []).append(ev.timestamp)
        elif isinstance(p, (LevelCompleted, LevelSkipped)) and open_starts.get(p.level_id):
            outcome = "completed" if isinstance(p, LevelCompleted) else "skipped"
            intervals.append(LevelInterval(p.level_id, open_starts[p.level_id].pop(),
                                           ev.timestamp, outcome))
    for level_id, starts in open_starts.items():
        intervals.extend(LevelInterval(level_id, start, None, "in_progress")
                         for start in starts)
    intervals.sort(key=lambda iv: (iv.start, iv.level_id))
    return intervals


# --- JSON Lines persistence ---------------------------------------------------


def run_to_dict(run: TrainingRun) -> dict:
    return {
        "type": "run_header",
        "run_id": run.run_id,
        "definition_id": run.definition_id,
        "start_time": run.start_time,
        "end_time": run.end_time,
        "participants": [
            {"actor_id": p.actor_id, "role": p.role, "team_id": p.team_id}
            for p in run.participants
        ],
    }


def run_from_dict(data: dict) -> TrainingRun:
    return TrainingRun(
        run_id=data["run_id"],
        definition_id=data["definition_id"],
        start_time=data["start_time"],
        end_time=data.get("end_time"),
        participants=tuple(
            Participant(p["actor_id"], p["role"], p.get("team_id"))
            for p in data.get("participants", [])
        ),
    )


def envelope_to_dict(ev: EventEnvelope) -> dict:
    out = {
        "type": "event",
        "run_id": ev.run_id,
        "seq": ev.seq,
        "timestamp": ev.timestamp,
        "actor_id": ev.actor_id,
        "payload": payload_to_dict(ev.payload),
    }
    if ev.clock_skew:
        out["clock_skew"] = True
    return out


def envelope_from_dict(data: dict) -> EventEnvelope:
    return EventEnvelope(
        run_id=data["run_id"],
        seq=data["seq"],
        timestamp=data["timestamp"],
        actor_id=data["actor_id"],
        payload=payload_from_dict(data["payload"]),
        clock_skew=data.get("clock_skew", False),
    )


def envelope_to_line(ev: EventEnvelope) -> str:
    return canonical_json(envelope_to_dict(ev))


def log_to_jsonl(log: EventLog) -> str:
    lines = [canonical_json(run_to_dict(log.run))]
    lines.extend(envelope_to_line(ev) for ev in log.events())
    return "".join(lines)


def log_from_jsonl(text: str, definition: TrainingDefinition | None = None) -> EventLog:
    """Rebuild a log from its JSON Lines form.

    Accepts the canonical batch form (end_time in the header) and the
    incremental form where a final {"type": "run_closed"} record carries
    the end time. Records are trusted as written; no re-validation.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise UnknownRunError("empty log document")
    header = json.loads(lines[0])
    if header.get("type") != "run_header":
        raise UnknownRunError("first record must be a run_header")
    run = run_from_dict(header)
    end_time = run.end_time

    log = EventLog(replace(run, end_time=None), definition)
    for ln in lines[1:]:
        record = json.loads(ln)
        rtype = record.get("type")
        if rtype == "event":
            log._events.append(envelope_from_dict(record))  # bypass append validation
        elif rtype == "run_closed":
            end_time = record["end_time"]
        else:
            raise ValueError(f"unknown record type '{rtype}'")
    if end_time is not None:
        log.close(end_time)
    return log


def write_log(log: EventLog, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(log_to_jsonl(log))


def read_log(path, definition: TrainingDefinition | None = None) -> EventLog:
    with open(path, encoding="utf-8") as fh:
        return log_from_jsonl(fh.read(), definition)
