"""Deterministic scoring: definition + event log -> transactions, timelines, boards.

Every transaction traces to exactly one event via source_seq. Scores are
never clamped; negative totals are information, not errors. Scorers are
resumable folds over the event stream, so scoring a full log equals
scoring any prefix and continuing with the suffix.
"""

from __future__ import annotations

from dataclasses import dataclass

from .definition import TrainingDefinition, canonical_json
from .errors import (
    KindMismatchError,
    UnknownCategoryError,
    UnknownReferenceError,
    UnknownServiceError,
    UnsortedInputError,
)
from .events import (
    EventEnvelope,
    FlagSubmitted,
    HintTaken,
    LevelCompleted,
    LevelSkipped,
    ManualScoring,
    ServiceProbe,
)

CATEGORY_LEVEL_COMPLETION = "level_completion"
CATEGORY_HINT_PENALTY = "hint_penalty"
CATEGORY_SKIP_PENALTY = "skip_penalty"
CATEGORY_WRONG_FLAG = "wrong_flag_penalty"
CATEGORY_SERVICE = "service_availability"
CATEGORY_REVERT = "revert"


def manual_category(name: str) -> str:
    return f"manual:{name}"


@dataclass(frozen=True)
class ScoreTransaction:
    subject: str  # actor_id or team_id
    timestamp: float
    delta: int
    category: str
    source_seq: int


@dataclass(frozen=True)
class ScoreTimeline:
    subject: str
    points: tuple[tuple[float, int], ...] = ()  # (timestamp, cumulative total)

    @property
    def total(self) -> int:
        return self.points[-1][1] if self.points else 0


@dataclass(frozen=True)
class ScoreRow:
    subject: str
    total: int
    per_category: dict  # category -> subtotal


@dataclass(frozen=True)
class Scoreboard:
    rows: tuple[ScoreRow, ...] = ()

    def row(self, subject: str) -> ScoreRow | None:
        for r in self.rows:
            if r.subject == subject:
                return r
        return None

    def rank(self, subject: str) -> int | None:
        """1-based position; ties share order by subject id, not rank value."""
        for i, r in enumerate(self.rows):
            if r.subject == subject:
                return i + 1
        return None


@dataclass(frozen=True)
class AssessmentRecord:
    subject: str
    metric: str  # "time_spent_sec" | "hints_taken" | "wrong_flags" | "completed"
    value: float | int | bool
    level_id: str | None = None


# --- CTF --------------------------------------------------------------------


class CtfScorer:
    """Fold CTF events into transactions; wrong-flag counts are the only state."""

    def __init__(self, defn: TrainingDefinition):
        if defn.kind != "CTF":
            raise KindMismatchError(f"CTF scorer on a {defn.kind} definition")
        self._defn = defn
        self._wrong_flags: dict[tuple[str, str], int] = {}  # (actor, level) -> count

    def feed(self, ev: EventEnvelope) -> list[ScoreTransaction]:
        defn = self._defn
        p = ev.payload
        if isinstance(p, HintTaken):
            hint = defn.hint_by_id(p.level_id, p.hint_id)
            if hint is None:
                raise UnknownReferenceError(
                    f"unknown hint '{p.hint_id}' in level '{p.level_id}'")
            return [ScoreTransaction(ev.actor_id, ev.timestamp, -hint.penalty_points,
                                     CATEGORY_HINT_PENALTY, ev.seq)]
        if isinstance(p, LevelCompleted):
            level = self._level(p.level_id)
            return [ScoreTransaction(ev.actor_id, ev.timestamp, level.max_points,
                                     CATEGORY_LEVEL_COMPLETION, ev.seq)]
        if isinstance(p, LevelSkipped):
            level = self._level(p.level_id)
            return [ScoreTransaction(ev.actor_id, ev.timestamp, -level.skip_penalty,
                                     CATEGORY_SKIP_PENALTY, ev.seq)]
        if isinstance(p, FlagSubmitted) and not p.correct:
            self._level(p.level_id)
            key = (ev.actor_id, p.level_id)
            count = self._wrong_flags.get(key, 0) + 1
            self._wrong_flags[key] = count
            free = defn.criteria.free_attempts
            if free is not None and count > free:
                return [ScoreTransaction(ev.actor_id, ev.timestamp,
                                         -defn.criteria.wrong_flag_penalty,
                                         CATEGORY_WRONG_FLAG, ev.seq)]
        return []

    def _level(self, level_id: str):
        level = self._defn.level_by_id(level_id)
        if level is None:
            raise UnknownReferenceError(f"unknown level '{level_id}'")
        return level


def score_ctf_run(defn: TrainingDefinition,
                  events: list[EventEnvelope]) -> list[ScoreTransaction]:
    """Score CTF events in seq order. Each transaction's subject is the
    acting trainee, so a single-trainee slice and a whole-run log both work."""
    scorer = CtfScorer(defn)
    out: list[ScoreTransaction] = []
    for ev in events:
        out.extend(scorer.feed(ev))
    return out


# --- CDX --------------------------------------------------------------------


class CdxScorer:
    """Fold CDX events into transactions. Stateless per event.

    Probe events carry no team, so the caller names the subject the event
    slice belongs to; manual events carry their own subject.
    """

    def __init__(self, defn: TrainingDefinition, subject: str):
        if defn.kind != "CDX":
            raise KindMismatchError(f"CDX scorer on a {defn.kind} definition")
        self._defn = defn
        self._subject = subject

    def feed(self, ev: EventEnvelope) -> list[ScoreTransaction]:
        defn = self._defn
        p = ev.payload
        if isinstance(p, ServiceProbe):
            svc = defn.service_by_id(p.service_id)
            if svc is None:
                raise UnknownServiceError(f"probe for unknown service '{p.service_id}'")
            delta = svc.award_per_check if p.status == "up" else -svc.penalty_per_failed_check
            return [ScoreTransaction(self._subject, ev.timestamp, delta,
                                     CATEGORY_SERVICE, ev.seq)]
        if isinstance(p, ManualScoring):
            if p.category == "revert":
                return [ScoreTransaction(p.subject, ev.timestamp,
                                         -defn.criteria.revert_penalty,
                                         CATEGORY_REVERT, ev.seq)]
            if p.category not in defn.criteria.manual_penalty_categories:
                raise UnknownCategoryError(f"unknown manual category '{p.category}'")
            return [ScoreTransaction(p.subject, ev.timestamp, p.points,
                                     manual_category(p.category), ev.seq)]
        return []


def score_cdx_run(defn: TrainingDefinition, events: list[EventEnvelope],
                  subject: str) -> list[ScoreTransaction]:
    scorer = CdxScorer(defn, subject)
    out: list[ScoreTransaction] = []
    for ev in events:
        out.extend(scorer.feed(ev))
    return out


# --- aggregation ------------------------------------------------------------


def build_timeline(transactions: list[ScoreTransaction]) -> ScoreTimeline:
    """Cumulative prefix sums over transactions already in
    (timestamp, source_seq) order."""
    last_key = None
    for tx in transactions:
        key = (tx.timestamp, tx.source_seq)
        if last_key is not None and key < last_key:
            raise UnsortedInputError(
                f"transaction at seq {tx.source_seq} out of order")
        last_key = key
    if not transactions:
        return ScoreTimeline(subject="", points=())
    subjects = {tx.subject for tx in transactions}
    if len(subjects) > 1:
        raise ValueError(f"timeline needs a single subject, got {sorted(subjects)}")
    points = []
    total = 0
    for tx in transactions:
        total += tx.delta
        points.append((tx.timestamp, total))
    return ScoreTimeline(subject=transactions[0].subject, points=tuple(points))


def build_scoreboard(transactions: list[ScoreTransaction]) -> Scoreboard:
    """One row per subject, totals descending, subject id ascending on ties."""
    per_subject: dict[str, dict[str, int]] = {}
    for tx in transactions:
        cats = per_subject.setdefault(tx.subject, {})
        cats[tx.category] = cats.get(tx.category, 0) + tx.delta
    rows = [
        ScoreRow(subject=s, total=sum(cats.values()),
                 per_category={k: cats[k] for k in sorted(cats)})
        for s, cats in per_subject.items()
    ]
    rows.sort(key=lambda r: (-r.total, r.subject))
    return Scoreboard(rows=tuple(rows))


# --- per-level assessment records -------------------------------------------


def assessment_records(defn: TrainingDefinition, events: list[EventEnvelope],
                       actor_id: str) -> list[AssessmentRecord]:
    """Quantitative per-level indicators for one trainee, in level order."""
    from .events import LevelStarted  # local to avoid re-exporting above

    started: dict[str, float] = {}
    ended: dict[str, float] = {}
    completed: set[str] = set()
    hints: dict[str, int] = {}
    wrong: dict[str, int] = {}
    for ev in events:
        if ev.actor_id != actor_id:
            continue
        p = ev.payload
        if isinstance(p, LevelStarted):
            started[p.level_id] = ev.timestamp
        elif isinstance(p, LevelCompleted):
            ended[p.level_id] = ev.timestamp
            completed.add(p.level_id)
        elif isinstance(p, LevelSkipped):
            ended[p.level_id] = ev.timestamp
        elif isinstance(p, HintTaken):
            hints[p.level_id] = hints.get(p.level_id, 0) + 1
        elif isinstance(p, FlagSubmitted) and not p.correct:
            wrong[p.level_id] = wrong.get(p.level_id, 0) + 1

    records: list[AssessmentRecord] = []
    for lvl in defn.scenario.levels:
        if lvl.id not in started:
            continue
        if lvl.id in ended:
            spent = ended[lvl.id] - started[lvl.id]
            records.append(AssessmentRecord(actor_id, "time_spent_sec", spent, lvl.id))
        records.append(AssessmentRecord(actor_id, "hints_taken", hints.get(lvl.id, 0), lvl.id))
        records.append(AssessmentRecord(actor_id, "wrong_flags", wrong.get(lvl.id, 0), lvl.id))
        records.append(AssessmentRecord(actor_id, "completed", lvl.id in completed, lvl.id))
    return records


# --- interchange ------------------------------------------------------------


def transaction_to_dict(tx: ScoreTransaction) -> dict:
    return {
        "type": "transaction",
        "subject": tx.subject,
        "timestamp": tx.timestamp,
        "delta": tx.delta,
        "category": tx.category,
        "source_seq": tx.source_seq,
    }


def transaction_from_dict(data: dict) -> ScoreTransaction:
    return ScoreTransaction(
        subject=data["subject"],
        timestamp=data["timestamp"],
        delta=data["delta"],
        category=data["category"],
        source_seq=data["source_seq"],
    )


def transactions_to_jsonl(transactions: list[ScoreTransaction]) -> str:
    return "".join(canonical_json(transaction_to_dict(tx)) for tx in transactions)
