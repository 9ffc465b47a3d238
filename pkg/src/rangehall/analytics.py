"""Live and reflection-phase analytics over definitions and event logs.

Every operation is a pure function of (definition, logs, parameters) with
deterministic output ordering. Thresholds default to the documented
values and stay configurable, because the source material leaves them as
placeholders.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

from .definition import TrainingDefinition
from .errors import (
    DefinitionMismatchError,
    EmptyReportError,
    NoRunsError,
    RunStillOpenError,
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
    MessageSent,
    NodeFailure,
    NodeMetric,
    NodeRecovery,
    ServiceProbe,
    SolutionDisplayed,
    derive_level_intervals,
    is_user_action,
    payload_kind,
)
from .scoring import build_scoreboard, score_cdx_run, score_ctf_run

# --- trouble detection (live training management) ----------------------------


@dataclass(frozen=True)
class TroubleRules:
    stuck_factor: float = 2.0  # open level longer than factor x expected_duration
    bruteforce_n: int = 4  # this many wrong flags ...
    bruteforce_window: float = 300.0  # ... within this many seconds
    quit_window: float = 180.0  # all hints + solution within this many seconds


@dataclass(frozen=True)
class TroubleAlert:
    actor_id: str
    level_id: str
    kind: str  # "stuck" | "flag_bruteforce" | "about_to_quit"
    evidence: str
    raised_at: float


def detect_trouble(log: EventLog, now: float,
                   rules: TroubleRules = TroubleRules()) -> list[TroubleAlert]:
    """Rule-based alerts over the events visible at `now`.

    Only events with timestamp <= now are considered, so evaluating a
    time-consistent log prefix and the full log at the same `now` agree.
    Alerts are sorted by (raised_at, actor_id, kind, level_id).
    """
    defn = log.definition
    alerts: list[TroubleAlert] = []
    visible = [ev for ev in log.events() if ev.timestamp <= now]

    for trainee in log.run.trainees():
        actor = trainee.actor_id
        open_level: dict[str, float] = {}
        wrong: dict[str, list[float]] = {}
        hints: dict[str, dict[str, float]] = {}
        solution: dict[str, float] = {}
        for ev in visible:
            if ev.actor_id != actor:
                continue
            p = ev.payload
            if isinstance(p, LevelStarted):
                open_level[p.level_id] = ev.timestamp
            elif isinstance(p, (LevelCompleted, LevelSkipped)):
                open_level.pop(p.level_id, None)
            elif isinstance(p, FlagSubmitted) and not p.correct:
                wrong.setdefault(p.level_id, []).append(ev.timestamp)
            elif isinstance(p, HintTaken):
                hints.setdefault(p.level_id, {}).setdefault(p.hint_id, ev.timestamp)
            elif isinstance(p, SolutionDisplayed):
                solution.setdefault(p.level_id, ev.timestamp)

        if defn is not None:
            for level_id, started in open_level.items():
                level = defn.level_by_id(level_id)
                if level is None:
                    continue
                threshold = rules.stuck_factor * level.expected_duration * 60.0
                if now - started > threshold:
                    alerts.append(TroubleAlert(
                        actor, level_id, "stuck",
                        f"level open for {(now - started) / 60.0:.1f} min, "
                        f"expected {level.expected_duration:g} min",
                        started + threshold))

        for level_id, times in wrong.items():
            hit = _first_window_hit(sorted(times), rules.bruteforce_n,
                                    rules.bruteforce_window)
            if hit is not None:
                alerts.append(TroubleAlert(
                    actor, level_id, "flag_bruteforce",
                    f"{rules.bruteforce_n} wrong flags within "
                    f"{rules.bruteforce_window / 60.0:g} min",
                    hit))

        if defn is not None:
            for level_id, shown_at in solution.items():
                level = defn.level_by_id(level_id)
                if level is None:
                    continue
                taken = hints.get(level_id, {})
                if any(h.id not in taken for h in level.hints):
                    continue
                times = [shown_at] + [taken[h.id] for h in level.hints]
                if max(times) - min(times) <= rules.quit_window:
                    alerts.append(TroubleAlert(
                        actor, level_id, "about_to_quit",
                        "all hints and the solution displayed within "
                        f"{rules.quit_window / 60.0:g} min",
                        max(times)))

    alerts.sort(key=lambda a: (a.raised_at, a.actor_id, a.kind, a.level_id))
    return alerts


def _first_window_hit(times: list[float], n: int, window: float) -> float | None:
    for i in range(n - 1, len(times)):
        if times[i] - times[i - n + 1] <= window:
            return times[i]
    return None


# --- personal feedback --------------------------------------------------------


@dataclass(frozen=True)
class LevelFeedback:
    level_id: str
    time_spent: float | None  # seconds; None while in progress
    hints_taken: int
    wrong_flags: int
    score_delta: int
    outcome: str  # "completed" | "skipped" | "in_progress"


@dataclass(frozen=True)
class CohortLevelStats:
    level_id: str
    slowest_time: float  # seconds, over closed intervals
    mean_time: float


@dataclass(frozen=True)
class FeedbackSummary:
    actor_id: str
    subject: str  # actor for CTF, team for CDX
    per_level: tuple[LevelFeedback, ...]
    total_score: int
    rank: int
    cohort_size: int
    cohort_stats: tuple[CohortLevelStats, ...]


def personal_feedback(log: EventLog, actor_id: str) -> FeedbackSummary:
    """Post-run reflection for one trainee: per-level rows, total, rank,
    and cohort timing stats. Requires a closed run."""
    if log.run.end_time is None:
        raise RunStillOpenError(f"run '{log.run.run_id}' is still open")
    participant = log.run.participant(actor_id)
    if participant is None or participant.role != "trainee":
        raise UnknownActorError(f"'{actor_id}' is not a trainee of run '{log.run.run_id}'")
    defn = log.definition
    if defn is None:
        raise ValueError("personal_feedback needs the run's definition on the log")

    if defn.kind == "CTF":
        transactions = score_ctf_run(defn, list(log.events()))
        subject = actor_id
    else:
        from .simulate import assign_nodes_to_teams, team_events

        node_team = assign_nodes_to_teams(defn, list(log.run.team_ids()))
        transactions = []
        for team in log.run.team_ids():
            transactions.extend(score_cdx_run(defn, team_events(log, node_team, team), team))
        transactions.sort(key=lambda tx: (tx.timestamp, tx.source_seq))
        subject = participant.team_id or actor_id

    board = build_scoreboard(transactions)
    row = board.row(subject)
    total = row.total if row is not None else 0
    rank = board.rank(subject) or 1

    per_level = _per_level_feedback(defn, log, actor_id, transactions)
    cohort = _cohort_stats(log)
    cohort_size = len(log.run.trainees()) if defn.kind == "CTF" else len(log.run.team_ids())
    return FeedbackSummary(
        actor_id=actor_id,
        subject=subject,
        per_level=tuple(per_level),
        total_score=total,
        rank=rank,
        cohort_size=cohort_size,
        cohort_stats=tuple(cohort),
    )


def _per_level_feedback(defn, log, actor_id, transactions) -> list[LevelFeedback]:
    intervals = {iv.level_id: iv for iv in derive_level_intervals(log, actor_id)}
    hints: dict[str, int] = {}
    wrong: dict[str, int] = {}
    deltas: dict[str, int] = {}
    seq_level: dict[int, str] = {}
    for ev in log.read(actors={actor_id}):
        p = ev.payload
        level_id = getattr(p, "level_id", None)
        if level_id is not None:
            seq_level[ev.seq] = level_id
        if isinstance(p, HintTaken):
            hints[p.level_id] = hints.get(p.level_id, 0) + 1
        elif isinstance(p, FlagSubmitted) and not p.correct:
            wrong[p.level_id] = wrong.get(p.level_id, 0) + 1
    for tx in transactions:
        if tx.subject == actor_id and tx.source_seq in seq_level:
            lid = seq_level[tx.source_seq]
            deltas[lid] = deltas.get(lid, 0) + tx.delta

    rows = []
    for lvl in sorted(defn.scenario.levels, key=lambda l: l.order):
        iv = intervals.get(lvl.id)
        if iv is None:
            continue
        spent = None if iv.end is None else iv.end - iv.start
        rows.append(LevelFeedback(
            level_id=lvl.id,
            time_spent=spent,
            hints_taken=hints.get(lvl.id, 0),
            wrong_flags=wrong.get(lvl.id, 0),
            score_delta=deltas.get(lvl.id, 0),
            outcome=iv.outcome,
        ))
    return rows


def _cohort_stats(log) -> list[CohortLevelStats]:
    times: dict[str, list[float]] = {}
    for trainee in log.run.trainees():
        for iv in derive_level_intervals(log, trainee.actor_id):
            if iv.end is not None:
                times.setdefault(iv.level_id, []).append(iv.end - iv.start)
    return [
        CohortLevelStats(level_id, max(vals), sum(vals) / len(vals))
        for level_id, vals in sorted(times.items())
    ]


# --- definition quality ---------------------------------------------------------


@dataclass(frozen=True)
class QualityThresholds:
    too_hard_completion: float = 0.3
    too_hard_ratio: float = 2.0
    too_easy_completion: float = 0.95
    too_easy_ratio: float = 0.5
    too_easy_hint_rate: float = 0.1


@dataclass(frozen=True)
class LevelQuality:
    level_id: str
    starters: int
    completion_rate: float
    median_time: float | None  # seconds, over completed intervals
    iqr_time: float | None
    time_ratio: float | None  # median / expected_duration
    hint_usage_rate: float
    difficulty_label: str  # "too_easy" | "balanced" | "too_hard"


@dataclass(frozen=True)
class CorrectnessFinding:
    code: str  # "NEVER_STARTED" | "NEVER_COMPLETED" | "SOLUTION_REQUIRED"
    level_id: str
    message: str


@dataclass(frozen=True)
class QualityReport:
    definition_id: str
    run_count: int
    per_level: tuple[LevelQuality, ...]
    correctness_findings: tuple[CorrectnessFinding, ...]

    @property
    def overall_completion_rate(self) -> float:
        if not self.per_level:
            return 0.0
        return sum(lq.completion_rate for lq in self.per_level) / len(self.per_level)

    @property
    def mean_time_ratio(self) -> float | None:
        ratios = [lq.time_ratio for lq in self.per_level if lq.time_ratio is not None]
        if not ratios:
            return None
        return sum(ratios) / len(ratios)


def definition_quality_report(defn: TrainingDefinition, logs: list[EventLog],
                              thresholds: QualityThresholds = QualityThresholds()
                              ) -> QualityReport:
    """Aggregate one or more closed runs of the same definition into
    per-level completion, timing, and difficulty statistics."""
    if not logs:
        raise NoRunsError("quality report needs at least one run")
    for log in logs:
        if log.run.definition_id != defn.id:
            raise DefinitionMismatchError(
                f"run '{log.run.run_id}' references definition "
                f"'{log.run.definition_id}', not '{defn.id}'")

    starters: dict[str, int] = {}
    completers: dict[str, int] = {}
    times: dict[str, list[float]] = {}
    hints_taken: dict[str, int] = {}
    completed_with_solution: dict[str, int] = {}
    for log in logs:
        for trainee in log.run.trainees():
            solution_seen: set[str] = set()
            for ev in log.read(actors={trainee.actor_id}):
                p = ev.payload
                if isinstance(p, HintTaken):
                    hints_taken[p.level_id] = hints_taken.get(p.level_id, 0) + 1
                elif isinstance(p, SolutionDisplayed):
                    solution_seen.add(p.level_id)
            for iv in derive_level_intervals(log, trainee.actor_id):
                starters[iv.level_id] = starters.get(iv.level_id, 0) + 1
                if iv.outcome == "completed":
                    completers[iv.level_id] = completers.get(iv.level_id, 0) + 1
                    times.setdefault(iv.level_id, []).append(iv.end - iv.start)
                    if iv.level_id in solution_seen:
                        completed_with_solution[iv.level_id] = \
                            completed_with_solution.get(iv.level_id, 0) + 1

    per_level: list[LevelQuality] = []
    findings: list[CorrectnessFinding] = []
    for lvl in sorted(defn.scenario.levels, key=lambda l: l.order):
        n_started = starters.get(lvl.id, 0)
        n_completed = completers.get(lvl.id, 0)
        rate = n_completed / n_started if n_started else 0.0
        lvl_times = times.get(lvl.id, [])
        if lvl_times:
            median = statistics.median(lvl_times)
            if len(lvl_times) >= 2:
                q = statistics.quantiles(lvl_times, n=4, method="inclusive")
                iqr = q[2] - q[0]
            else:
                iqr = 0.0
            ratio = (median / 60.0) / lvl.expected_duration
        else:
            median = iqr = ratio = None
        if lvl.hints and n_started:
            hint_rate = hints_taken.get(lvl.id, 0) / (n_started * len(lvl.hints))
        else:
            hint_rate = 0.0
        per_level.append(LevelQuality(
            level_id=lvl.id,
            starters=n_started,
            completion_rate=rate,
            median_time=median,
            iqr_time=iqr,
            time_ratio=ratio,
            hint_usage_rate=hint_rate,
            difficulty_label=_difficulty_label(rate, ratio, hint_rate, thresholds),
        ))
        if n_started == 0:
            findings.append(CorrectnessFinding(
                "NEVER_STARTED", lvl.id, f"level '{lvl.id}' was never started by anyone"))
        elif n_completed == 0:
            findings.append(CorrectnessFinding(
                "NEVER_COMPLETED", lvl.id, f"level '{lvl.id}' was never completed by anyone"))
        elif completed_with_solution.get(lvl.id, 0) == n_completed:
            findings.append(CorrectnessFinding(
                "SOLUTION_REQUIRED", lvl.id,
                f"every completer of level '{lvl.id}' displayed the solution first"))

    return QualityReport(
        definition_id=defn.id,
        run_count=len(logs),
        per_level=tuple(per_level),
        correctness_findings=tuple(findings),
    )


def _difficulty_label(rate: float, ratio: float | None, hint_rate: float,
                      t: QualityThresholds) -> str:
    if rate < t.too_hard_completion or (ratio is not None and ratio > t.too_hard_ratio):
        return "too_hard"
    if (rate > t.too_easy_completion and hint_rate < t.too_easy_hint_rate
            and (ratio is None or ratio < t.too_easy_ratio)):
        return "too_easy"
    return "balanced"


# --- definition comparison ------------------------------------------------------


@dataclass(frozen=True)
class ComparisonTolerances:
    completion: float = 0.05
    time_ratio: float = 0.1


@dataclass(frozen=True)
class ComparisonReport:
    harder: str  # "a" | "b" | "indistinguishable"
    completion_delta: float  # a - b
    time_ratio_delta: float | None  # a - b
    effect_size: float | None  # difference in mean time_ratio (a - b)


def compare_definitions(report_a: QualityReport, report_b: QualityReport,
                        tolerances: ComparisonTolerances = ComparisonTolerances()
                        ) -> ComparisonReport:
    """Which of two quality reports describes the harder definition.

    Lower overall completion rate wins; within tolerance, the higher mean
    time ratio breaks the tie; within both tolerances the pair is
    indistinguishable."""
    if not report_a.per_level or not report_b.per_level:
        raise EmptyReportError("both quality reports must cover at least one level")
    comp_a, comp_b = report_a.overall_completion_rate, report_b.overall_completion_rate
    ratio_a, ratio_b = report_a.mean_time_ratio, report_b.mean_time_ratio
    completion_delta = comp_a - comp_b
    ratio_delta = None if ratio_a is None or ratio_b is None else ratio_a - ratio_b

    if abs(completion_delta) >= tolerances.completion:
        harder = "a" if comp_a < comp_b else "b"
    elif ratio_delta is not None and abs(ratio_delta) >= tolerances.time_ratio:
        harder = "a" if ratio_delta > 0 else "b"
    else:
        harder = "indistinguishable"
    return ComparisonReport(
        harder=harder,
        completion_delta=completion_delta,
        time_ratio_delta=ratio_delta,
        effect_size=ratio_delta,
    )


# --- behavior analysis -----------------------------------------------------------


@dataclass(frozen=True)
class BehaviorGraph:
    nodes: dict  # node label -> occurrence count
    edges: dict  # (from, to) -> directly-follows count
    anomaly_scores: dict  # "run_id/actor_id" -> z-score of total active time
    node_score_overlay: dict = field(default_factory=dict)  # node -> mean delta


def behavior_analysis(logs: list[EventLog], level_qualified: bool = False,
                      transactions_by_run: dict | None = None) -> BehaviorGraph:
    """Directly-follows graph over each trainee's action sequence, with a
    z-score per trainee of total active time.

    With level_qualified=True nodes carry the level id, so the same action
    in different levels becomes distinct nodes. When a run's transactions
    are supplied, each node is annotated with the mean score delta its
    occurrences caused.
    """
    if not logs:
        raise NoRunsError("behavior analysis needs at least one run")

    nodes: dict[str, int] = {}
    edges: dict[tuple[str, str], int] = {}
    total_time: dict[str, float] = {}
    node_delta_sum: dict[str, int] = {}

    for log in logs:
        tx_by_seq: dict[int, int] = {}
        if transactions_by_run and log.run.run_id in transactions_by_run:
            for tx in transactions_by_run[log.run.run_id]:
                tx_by_seq[tx.source_seq] = tx_by_seq.get(tx.source_seq, 0) + tx.delta
        for trainee in log.run.trainees():
            actions = [ev for ev in log.read(actors={trainee.actor_id})
                       if is_user_action(ev.payload)]
            if not actions:
                continue
            labels = [_node_label(ev, level_qualified) for ev in actions]
            for label, ev in zip(labels, actions):
                nodes[label] = nodes.get(label, 0) + 1
                node_delta_sum[label] = node_delta_sum.get(label, 0) + tx_by_seq.get(ev.seq, 0)
            for a, b in zip(labels, labels[1:]):
                edges[(a, b)] = edges.get((a, b), 0) + 1
            key = f"{log.run.run_id}/{trainee.actor_id}"
            total_time[key] = actions[-1].timestamp - actions[0].timestamp

    values = list(total_time.values())
    if len(values) >= 2 and statistics.pstdev(values) > 0:
        mean = statistics.fmean(values)
        std = statistics.pstdev(values)
        anomaly = {k: (v - mean) / std for k, v in total_time.items()}
    else:
        anomaly = {k: 0.0 for k in total_time}

    overlay = {label: node_delta_sum[label] / nodes[label] for label in nodes} \
        if transactions_by_run else {}
    return BehaviorGraph(nodes=nodes, edges=edges, anomaly_scores=anomaly,
                         node_score_overlay=overlay)


def _node_label(ev: EventEnvelope, level_qualified: bool) -> str:
    kind = payload_kind(ev.payload)
    level_id = getattr(ev.payload, "level_id", None)
    if level_qualified and level_id is not None:
        return f"{kind}:{level_id}"
    return kind


# --- communication centrality ------------------------------------------------------


@dataclass(frozen=True)
class CommunicationStats:
    actor_id: str
    degree: int  # distinct communication partners
    weighted_degree: int  # messages sent + received


@dataclass(frozen=True)
class CommunicationReport:
    stats: dict  # actor_id -> CommunicationStats
    leader_candidates: dict  # team_id -> tuple of actor_ids with maximal weighted degree


def communication_centrality(log: EventLog) -> CommunicationReport:
    """Degree and weighted degree per actor over the message graph, plus
    the per-team leader candidates (maximal weighted degree, ties listed)."""
    partners: dict[str, set[str]] = {p.actor_id: set() for p in log.run.participants}
    weighted: dict[str, int] = {p.actor_id: 0 for p in log.run.participants}
    for ev in log.events():
        p = ev.payload
        if not isinstance(p, MessageSent):
            continue
        sender, receiver = ev.actor_id, p.to_actor_id
        partners.setdefault(sender, set()).add(receiver)
        partners.setdefault(receiver, set()).add(sender)
        weighted[sender] = weighted.get(sender, 0) + 1
        weighted[receiver] = weighted.get(receiver, 0) + 1

    stats = {
        actor: CommunicationStats(actor, len(partners[actor]), weighted.get(actor, 0))
        for actor in sorted(partners)
    }

    leaders: dict[str, tuple[str, ...]] = {}
    for team in log.run.team_ids():
        team_actors = [p.actor_id for p in log.run.participants if p.team_id == team]
        team_weights = {a: weighted.get(a, 0) for a in team_actors}
        best = max(team_weights.values(), default=0)
        if best > 0:
            leaders[team] = tuple(sorted(a for a, w in team_weights.items() if w == best))
        else:
            leaders[team] = ()
    return CommunicationReport(stats=stats, leader_candidates=leaders)


# --- infrastructure report -----------------------------------------------------------


@dataclass(frozen=True)
class ServiceUptime:
    service_id: str
    probes: int
    up_probes: int

    @property
    def uptime_fraction(self) -> float:
        return self.up_probes / self.probes if self.probes else 0.0


@dataclass(frozen=True)
class NodeReliability:
    node_id: str
    failure_count: int
    operating_hours: float
    mttf_hours: float | None  # absent when failure_count == 0


@dataclass(frozen=True)
class PercentileSummary:
    p50: float
    p95: float
    max: float


@dataclass(frozen=True)
class NodeUtilization:
    node_id: str
    cpu: PercentileSummary
    memory: PercentileSummary


@dataclass(frozen=True)
class InfrastructureReport:
    services: tuple[ServiceUptime, ...]
    nodes: tuple[NodeReliability, ...]
    utilization: tuple[NodeUtilization, ...]


def infrastructure_report(logs: list[EventLog]) -> InfrastructureReport:
    """Uptime fractions, MTTF, and nearest-rank utilization percentiles
    over every infrastructure event in the given runs. Runs without
    infrastructure data simply yield empty sections."""
    probes: dict[str, list[int]] = {}  # service -> [total, up]
    failures: dict[str, int] = {}
    operating: dict[str, float] = {}
    cpu: dict[str, list[float]] = {}
    mem: dict[str, list[float]] = {}

    for log in logs:
        window_start = log.run.start_time
        events = log.events()
        window_end = log.run.end_time
        if window_end is None:
            window_end = events[-1].timestamp if events else window_start

        node_up_since: dict[str, float] = {}
        seen_nodes: set[str] = set()
        for ev in events:
            p = ev.payload
            if isinstance(p, ServiceProbe):
                counts = probes.setdefault(p.service_id, [0, 0])
                counts[0] += 1
                if p.status == "up":
                    counts[1] += 1
            elif isinstance(p, NodeFailure):
                seen_nodes.add(p.node_id)
                failures[p.node_id] = failures.get(p.node_id, 0) + 1
                since = node_up_since.pop(p.node_id, window_start)
                operating[p.node_id] = operating.get(p.node_id, 0.0) \
                    + max(ev.timestamp - since, 0.0)
            elif isinstance(p, NodeRecovery):
                seen_nodes.add(p.node_id)
                node_up_since.setdefault(p.node_id, ev.timestamp)
            elif isinstance(p, NodeMetric):
                cpu.setdefault(p.node_id, []).append(p.cpu_percent)
                mem.setdefault(p.node_id, []).append(p.memory_percent)

        for node_id in seen_nodes:
            since = node_up_since.pop(node_id, None)
            if since is None and failures.get(node_id, 0) == 0:
                since = window_start
            if since is not None:
                operating[node_id] = operating.get(node_id, 0.0) \
                    + max(window_end - since, 0.0)

    services = tuple(
        ServiceUptime(sid, total, up)
        for sid, (total, up) in sorted(probes.items())
    )
    nodes = tuple(
        NodeReliability(
            node_id=nid,
            failure_count=failures.get(nid, 0),
            operating_hours=operating.get(nid, 0.0) / 3600.0,
            mttf_hours=(operating.get(nid, 0.0) / 3600.0) / failures[nid]
            if failures.get(nid) else None,
        )
        for nid in sorted(set(failures) | set(operating))
    )
    utilization = tuple(
        NodeUtilization(
            node_id=nid,
            cpu=_percentiles(cpu[nid]),
            memory=_percentiles(mem[nid]),
        )
        for nid in sorted(cpu)
    )
    return InfrastructureReport(services=services, nodes=nodes, utilization=utilization)


def _percentiles(samples: list[float]) -> PercentileSummary:
    return PercentileSummary(
        p50=nearest_rank(samples, 50.0),
        p95=nearest_rank(samples, 95.0),
        max=max(samples),
    )


def nearest_rank(samples: list[float], percentile: float) -> float:
    """Nearest-rank percentile: the value at rank ceil(p/100 * n), 1-based."""
    if not samples:
        raise ValueError("no samples")
    ordered = sorted(samples)
    rank = math.ceil(percentile / 100.0 * len(ordered))
    return ordered[max(rank, 1) - 1]


# --- supervisor timeline (intervention context) ----------------------------------


@dataclass(frozen=True)
class SupervisionEvent:
    timestamp: float
    supervisor: str
    target: str
    note: str


def supervision_timeline(log: EventLog) -> list[SupervisionEvent]:
    """Supervisor messages in event order, for side-by-side review with
    alerts. No causal claim is made about their effect on trainees."""
    supervisors = {p.actor_id for p in log.run.participants if p.role == "supervisor"}
    out = []
    for ev in log.events():
        p = ev.payload
        if isinstance(p, MessageSent) and ev.actor_id in supervisors:
            out.append(SupervisionEvent(ev.timestamp, ev.actor_id, p.to_actor_id, p.text))
    return out
