"""Cyber-range training analytics: definitions, event logs, deterministic
scoring, seeded session simulation, analytics, and role-scoped live views."""

from .definition import (
    AssessmentCriteria,
    AttackPlanEntry,
    Finding,
    Hint,
    Level,
    NetworkNode,
    NetworkTopology,
    ScoredService,
    TechnicalScenario,
    TrainingDefinition,
    ValidationReport,
    max_achievable_score,
    parse_definition,
    serialize_definition,
    validate_definition,
)
from .events import (
    EventEnvelope,
    EventLog,
    LevelInterval,
    Participant,
    TrainingRun,
    derive_level_intervals,
    log_from_jsonl,
    log_to_jsonl,
    read_log,
    write_log,
)
from .scoring import (
    AssessmentRecord,
    Scoreboard,
    ScoreTimeline,
    ScoreTransaction,
    build_scoreboard,
    build_timeline,
    score_cdx_run,
    score_ctf_run,
)
from .simulate import (
    SimulationConfig,
    TraineeProfile,
    simulate_cdx_run,
    simulate_ctf_run,
)
from .analytics import (
    BehaviorGraph,
    ComparisonReport,
    FeedbackSummary,
    InfrastructureReport,
    QualityReport,
    TroubleAlert,
    TroubleRules,
    behavior_analysis,
    communication_centrality,
    compare_definitions,
    definition_quality_report,
    detect_trouble,
    infrastructure_report,
    personal_feedback,
)
from .gateway import (
    AttackPlanState,
    RoleView,
    project_role_view,
    publish_update,
)

__version__ = "0.1.0"
