"""Training definitions: parsing, validation, canonical serialization.

A definition bundles the technical scenario (topology, levels or attack
plan, vulnerabilities) with the assessment criteria (scored services,
manual penalty categories, flag/revert penalties). Two input syntaxes are
accepted: canonical JSON and human-editable YAML with identical field
names. The serializer always emits the canonical JSON form (keys sorted
lexicographically, compact separators, UTF-8, trailing LF) so that
parse -> serialize is byte-stable.

Durations are minutes everywhere except ScoredService.check_interval,
which is seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import yaml

from .errors import (
    DanglingReferenceError,
    DefinitionSyntaxError,
    InvalidDefinitionError,
    SchemaError,
)

SCHEMA_VERSION = 1

KINDS = ("CTF", "CDX")
NODE_ROLES = ("attacker", "victim", "server", "workstation", "router")


# --- domain types -----------------------------------------------------------


@dataclass(frozen=True)
class Hint:
    """Purchasable assistance within a level, charged at take-time."""

    id: str
    text: str
    penalty_points: int


@dataclass(frozen=True)
class Level:
    """One CTF level; access is gated by completing or skipping the previous one."""

    id: str
    order: int
    title: str
    flag: str
    max_points: int
    expected_duration: float  # minutes
    task_text: str = ""
    solution_text: str = ""
    skip_penalty: int = 0
    hints: tuple[Hint, ...] = ()


@dataclass(frozen=True)
class AttackPlanEntry:
    """One scheduled red-team attack. Runtime state lives in the run, not here."""

    id: str
    scheduled_offset: float  # minutes from run start
    attack_type: str
    target: str  # node_id
    penalty_points: int
    details: str = ""


@dataclass(frozen=True)
class NetworkNode:
    id: str
    role: str  # one of NODE_ROLES
    services: tuple[str, ...] = ()


@dataclass(frozen=True)
class NetworkTopology:
    nodes: tuple[NetworkNode, ...] = ()
    links: tuple[tuple[str, str], ...] = ()

    def node_ids(self) -> set[str]:
        return {n.id for n in self.nodes}

    def node(self, node_id: str) -> NetworkNode | None:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None


@dataclass(frozen=True)
class TechnicalScenario:
    topology: NetworkTopology
    levels: tuple[Level, ...] = ()
    attack_plan: tuple[AttackPlanEntry, ...] = ()
    vulnerabilities: tuple[tuple[str, str], ...] = ()  # (node_id, label)


@dataclass(frozen=True)
class ScoredService:
    """A network service whose periodic availability checks move the score.

    depends_on is parsed and stored but deliberately ignored by the
    scoring engine.
    """

    id: str
    node_id: str
    service_name: str
    check_interval: float  # seconds
    award_per_check: int = 0
    penalty_per_failed_check: int = 0
    depends_on: tuple[str, ...] = ()


@dataclass(frozen=True)
class AssessmentCriteria:
    scored_services: tuple[ScoredService, ...] = ()
    manual_penalty_categories: tuple[str, ...] = ()
    revert_penalty: int = 0
    wrong_flag_penalty: int = 0
    free_attempts: int | None = None  # None = unlimited
    questionnaires: tuple[dict, ...] = ()  # opaque, stored and echoed


@dataclass(frozen=True)
class TrainingDefinition:
    id: str
    title: str
    kind: str  # "CTF" | "CDX"
    scenario: TechnicalScenario
    criteria: AssessmentCriteria
    expected_total_duration: float  # minutes
    max_participants: int
    prerequisites: tuple[str, ...] = ()

    def level_by_id(self, level_id: str) -> Level | None:
        for lvl in self.scenario.levels:
            if lvl.id == level_id:
                return lvl
        return None

    def hint_by_id(self, level_id: str, hint_id: str) -> Hint | None:
        lvl = self.level_by_id(level_id)
        if lvl is None:
            return None
        for h in lvl.hints:
            if h.id == hint_id:
                return h
        return None

    def service_by_id(self, service_id: str) -> ScoredService | None:
        for s in self.criteria.scored_services:
            if s.id == service_id:
                return s
        return None


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors


# --- schema walking helpers -------------------------------------------------


def _require(data: dict, key: str, loc: str):
    if key not in data:
        raise SchemaError(f"missing required field '{key}'", loc)
    return data[key]


def _check_unknown(data: dict, allowed: set[str], loc: str) -> None:
    for key in data:
        if key not in allowed:
            raise SchemaError(f"unknown field '{key}'", f"{loc}.{key}" if loc else key)


def _as_str(value, loc: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"expected string, got {type(value).__name__}", loc)
    return value


def _as_int(value, loc: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected integer, got {type(value).__name__}", loc)
    return value


def _as_number(value, loc: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected number, got {type(value).__name__}", loc)
    return float(value)


def _as_list(value, loc: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected list, got {type(value).__name__}", loc)
    return value


def _as_dict(value, loc: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"expected mapping, got {type(value).__name__}", loc)
    return value


def _as_str_list(value, loc: str) -> tuple[str, ...]:
    return tuple(_as_str(v, f"{loc}[{i}]") for i, v in enumerate(_as_list(value, loc)))


# --- parsing ----------------------------------------------------------------


def parse_definition(document: str) -> TrainingDefinition:
    """Parse a definition document (canonical JSON or YAML).

    Raises DefinitionSyntaxError for malformed text, SchemaError for
    missing/unknown fields or wrong field types, DanglingReferenceError
    for identifiers that do not resolve.
    """
    data = _load_document(document)
    if not isinstance(data, dict):
        raise SchemaError("document must be a mapping", "")
    return definition_from_dict(data)


def _load_document(document: str):
    try:
        return json.loads(document)
    except json.JSONDecodeError as json_err:
        if document.lstrip()[:1] in ("{", "["):
            # Looks like JSON; report the JSON position rather than
            # falling through to a confusing YAML error.
            raise DefinitionSyntaxError(json_err.msg, json_err.lineno, json_err.colno) from None
    try:
        return yaml.safe_load(document)
    except yaml.YAMLError as yaml_err:
        mark = getattr(yaml_err, "problem_mark", None)
        if mark is not None:
            raise DefinitionSyntaxError(str(getattr(yaml_err, "problem", yaml_err)),
                                        mark.line + 1, mark.column + 1) from None
        raise DefinitionSyntaxError(str(yaml_err)) from None


def definition_from_dict(data: dict) -> TrainingDefinition:
    """Build a TrainingDefinition from a plain dict (parsed JSON/YAML)."""
    top_fields = {"schema_version", "id", "title", "kind", "prerequisites",
                  "expected_total_duration", "max_participants", "scenario", "criteria"}
    _check_unknown(data, top_fields, "")

    version = _as_int(_require(data, "schema_version", ""), "schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version}", "schema_version")
    kind = _as_str(_require(data, "kind", ""), "kind")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {KINDS}, got '{kind}'", "kind")

    scenario = _parse_scenario(_as_dict(_require(data, "scenario", ""), "scenario"))
    criteria = _parse_criteria(_as_dict(_require(data, "criteria", ""), "criteria"))

    defn = TrainingDefinition(
        id=_as_str(_require(data, "id", ""), "id"),
        title=_as_str(_require(data, "title", ""), "title"),
        kind=kind,
        scenario=scenario,
        criteria=criteria,
        prerequisites=_as_str_list(data.get("prerequisites", []), "prerequisites"),
        expected_total_duration=_as_number(
            _require(data, "expected_total_duration", ""), "expected_total_duration"),
        max_participants=_as_int(_require(data, "max_participants", ""), "max_participants"),
    )
    _resolve_references(defn)
    return defn


def _parse_scenario(data: dict) -> TechnicalScenario:
    _check_unknown(data, {"topology", "levels", "attack_plan", "vulnerabilities"}, "scenario")
    topology = _parse_topology(_as_dict(_require(data, "topology", "scenario"), "scenario.topology"))

    levels = []
    for i, raw in enumerate(_as_list(data.get("levels", []), "scenario.levels")):
        levels.append(_parse_level(_as_dict(raw, f"scenario.levels[{i}]"), f"scenario.levels[{i}]"))

    attack_plan = []
    for i, raw in enumerate(_as_list(data.get("attack_plan", []), "scenario.attack_plan")):
        attack_plan.append(
            _parse_attack_entry(_as_dict(raw, f"scenario.attack_plan[{i}]"),
                                f"scenario.attack_plan[{i}]"))

    vulnerabilities = []
    for i, raw in enumerate(_as_list(data.get("vulnerabilities", []), "scenario.vulnerabilities")):
        loc = f"scenario.vulnerabilities[{i}]"
        entry = _as_dict(raw, loc)
        _check_unknown(entry, {"node_id", "label"}, loc)
        vulnerabilities.append((_as_str(_require(entry, "node_id", loc), f"{loc}.node_id"),
                                _as_str(_require(entry, "label", loc), f"{loc}.label")))

    return TechnicalScenario(topology=topology, levels=tuple(levels),
                             attack_plan=tuple(attack_plan),
                             vulnerabilities=tuple(vulnerabilities))


def _parse_topology(data: dict) -> NetworkTopology:
    _check_unknown(data, {"nodes", "links"}, "scenario.topology")
    nodes = []
    for i, raw in enumerate(_as_list(data.get("nodes", []), "scenario.topology.nodes")):
        loc = f"scenario.topology.nodes[{i}]"
        entry = _as_dict(raw, loc)
        _check_unknown(entry, {"node_id", "role", "services"}, loc)
        role = _as_str(_require(entry, "role", loc), f"{loc}.role")
        if role not in NODE_ROLES:
            raise SchemaError(f"role must be one of {NODE_ROLES}, got '{role}'", f"{loc}.role")
        nodes.append(NetworkNode(
            id=_as_str(_require(entry, "node_id", loc), f"{loc}.node_id"),
            role=role,
            services=_as_str_list(entry.get("services", []), f"{loc}.services"),
        ))
    links = []
    for i, raw in enumerate(_as_list(data.get("links", []), "scenario.topology.links")):
        loc = f"scenario.topology.links[{i}]"
        pair = _as_list(raw, loc)
        if len(pair) != 2:
            raise SchemaError("link must be a [node_id, node_id] pair", loc)
        links.append((_as_str(pair[0], f"{loc}[0]"), _as_str(pair[1], f"{loc}[1]")))
    return NetworkTopology(nodes=tuple(nodes), links=tuple(links))


def _parse_level(data: dict, loc: str) -> Level:
    allowed = {"id", "order", "title", "task_text", "flag", "max_points", "hints",
               "expected_duration", "solution_text", "skip_penalty"}
    _check_unknown(data, allowed, loc)
    hints = []
    for i, raw in enumerate(_as_list(data.get("hints", []), f"{loc}.hints")):
        hloc = f"{loc}.hints[{i}]"
        entry = _as_dict(raw, hloc)
        _check_unknown(entry, {"id", "text", "penalty_points"}, hloc)
        hints.append(Hint(
            id=_as_str(_require(entry, "id", hloc), f"{hloc}.id"),
            text=_as_str(_require(entry, "text", hloc), f"{hloc}.text"),
            penalty_points=_as_int(_require(entry, "penalty_points", hloc),
                                   f"{hloc}.penalty_points"),
        ))
    return Level(
        id=_as_str(_require(data, "id", loc), f"{loc}.id"),
        order=_as_int(_require(data, "order", loc), f"{loc}.order"),
        title=_as_str(_require(data, "title", loc), f"{loc}.title"),
        task_text=_as_str(data.get("task_text", ""), f"{loc}.task_text"),
        flag=_as_str(_require(data, "flag", loc), f"{loc}.flag"),
        max_points=_as_int(_require(data, "max_points", loc), f"{loc}.max_points"),
        hints=tuple(hints),
        expected_duration=_as_number(_require(data, "expected_duration", loc),
                                     f"{loc}.expected_duration"),
        solution_text=_as_str(data.get("solution_text", ""), f"{loc}.solution_text"),
        skip_penalty=_as_int(data.get("skip_penalty", 0), f"{loc}.skip_penalty"),
    )


def _parse_attack_entry(data: dict, loc: str) -> AttackPlanEntry:
    allowed = {"id", "scheduled_offset", "attack_type", "target", "penalty_points", "details"}
    _check_unknown(data, allowed, loc)
    return AttackPlanEntry(
        id=_as_str(_require(data, "id", loc), f"{loc}.id"),
        scheduled_offset=_as_number(_require(data, "scheduled_offset", loc),
                                    f"{loc}.scheduled_offset"),
        attack_type=_as_str(_require(data, "attack_type", loc), f"{loc}.attack_type"),
        target=_as_str(_require(data, "target", loc), f"{loc}.target"),
        penalty_points=_as_int(_require(data, "penalty_points", loc), f"{loc}.penalty_points"),
        details=_as_str(data.get("details", ""), f"{loc}.details"),
    )


def _parse_criteria(data: dict) -> AssessmentCriteria:
    allowed = {"scored_services", "manual_penalty_categories", "revert_penalty",
               "wrong_flag_penalty", "free_attempts", "questionnaires"}
    _check_unknown(data, allowed, "criteria")
    services = []
    for i, raw in enumerate(_as_list(data.get("scored_services", []), "criteria.scored_services")):
        loc = f"criteria.scored_services[{i}]"
        entry = _as_dict(raw, loc)
        _check_unknown(entry, {"id", "node_id", "service_name", "check_interval",
                               "award_per_check", "penalty_per_failed_check", "depends_on"}, loc)
        services.append(ScoredService(
            id=_as_str(_require(entry, "id", loc), f"{loc}.id"),
            node_id=_as_str(_require(entry, "node_id", loc), f"{loc}.node_id"),
            service_name=_as_str(_require(entry, "service_name", loc), f"{loc}.service_name"),
            check_interval=_as_number(_require(entry, "check_interval", loc),
                                      f"{loc}.check_interval"),
            award_per_check=_as_int(entry.get("award_per_check", 0), f"{loc}.award_per_check"),
            penalty_per_failed_check=_as_int(entry.get("penalty_per_failed_check", 0),
                                             f"{loc}.penalty_per_failed_check"),
            depends_on=_as_str_list(entry.get("depends_on", []), f"{loc}.depends_on"),
        ))
    free_attempts = data.get("free_attempts")
    if free_attempts is not None:
        free_attempts = _as_int(free_attempts, "criteria.free_attempts")
    questionnaires = tuple(
        _as_dict(q, f"criteria.questionnaires[{i}]")
        for i, q in enumerate(_as_list(data.get("questionnaires", []), "criteria.questionnaires")))
    return AssessmentCriteria(
        scored_services=tuple(services),
        manual_penalty_categories=_as_str_list(data.get("manual_penalty_categories", []),
                                               "criteria.manual_penalty_categories"),
        revert_penalty=_as_int(data.get("revert_penalty", 0), "criteria.revert_penalty"),
        wrong_flag_penalty=_as_int(data.get("wrong_flag_penalty", 0), "criteria.wrong_flag_penalty"),
        free_attempts=free_attempts,
        questionnaires=questionnaires,
    )


def _resolve_references(defn: TrainingDefinition) -> None:
    """Two-pass reference check: collect declared ids, then walk every use."""
    node_ids = defn.scenario.topology.node_ids()
    service_ids = {s.id for s in defn.criteria.scored_services}

    for i, (a, b) in enumerate(defn.scenario.topology.links):
        for end in (a, b):
            if end not in node_ids:
                raise DanglingReferenceError(
                    f"link endpoint '{end}' is not a declared node", end,
                    f"scenario.topology.links[{i}]")
    for i, entry in enumerate(defn.scenario.attack_plan):
        if entry.target not in node_ids:
            raise DanglingReferenceError(
                f"attack target '{entry.target}' is not a declared node", entry.target,
                f"scenario.attack_plan[{i}].target")
    for i, (node_id, _label) in enumerate(defn.scenario.vulnerabilities):
        if node_id not in node_ids:
            raise DanglingReferenceError(
                f"vulnerability node '{node_id}' is not a declared node", node_id,
                f"scenario.vulnerabilities[{i}].node_id")
    for i, svc in enumerate(defn.criteria.scored_services):
        loc = f"criteria.scored_services[{i}]"
        if svc.node_id not in node_ids:
            raise DanglingReferenceError(
                f"scored service node '{svc.node_id}' is not a declared node", svc.node_id,
                f"{loc}.node_id")
        node = defn.scenario.topology.node(svc.node_id)
        if node is not None and svc.service_name not in node.services:
            raise DanglingReferenceError(
                f"service '{svc.service_name}' is not hosted on node '{svc.node_id}'",
                svc.service_name, f"{loc}.service_name")
        for dep in svc.depends_on:
            if dep not in service_ids:
                raise DanglingReferenceError(
                    f"dependency '{dep}' is not a declared scored service", dep,
                    f"{loc}.depends_on")


# --- serialization ----------------------------------------------------------


def definition_to_dict(defn: TrainingDefinition) -> dict:
    """Plain-dict form with every field materialized (defaults included)."""
    return {
        "schema_version": SCHEMA_VERSION,
        "id": defn.id,
        "title": defn.title,
        "kind": defn.kind,
        "prerequisites": list(defn.prerequisites),
        "expected_total_duration": defn.expected_total_duration,
        "max_participants": defn.max_participants,
        "scenario": {
            "topology": {
                "nodes": [
                    {"node_id": n.id, "role": n.role, "services": list(n.services)}
                    for n in defn.scenario.topology.nodes
                ],
                "links": [[a, b] for a, b in defn.scenario.topology.links],
            },
            "levels": [
                {
                    "id": lvl.id,
                    "order": lvl.order,
                    "title": lvl.title,
                    "task_text": lvl.task_text,
                    "flag": lvl.flag,
                    "max_points": lvl.max_points,
                    "hints": [
                        {"id": h.id, "text": h.text, "penalty_points": h.penalty_points}
                        for h in lvl.hints
                    ],
                    "expected_duration": lvl.expected_duration,
                    "solution_text": lvl.solution_text,
                    "skip_penalty": lvl.skip_penalty,
                }
                for lvl in defn.scenario.levels
            ],
            "attack_plan": [
                {
                    "id": e.id,
                    "scheduled_offset": e.scheduled_offset,
                    "attack_type": e.attack_type,
                    "target": e.target,
                    "penalty_points": e.penalty_points,
                    "details": e.details,
                }
                for e in defn.scenario.attack_plan
            ],
            "vulnerabilities": [
                {"node_id": node_id, "label": label}
                for node_id, label in defn.scenario.vulnerabilities
            ],
        },
        "criteria": {
            "scored_services": [
                {
                    "id": s.id,
                    "node_id": s.node_id,
                    "service_name": s.service_name,
                    "check_interval": s.check_interval,
                    "award_per_check": s.award_per_check,
                    "penalty_per_failed_check": s.penalty_per_failed_check,
                    "depends_on": list(s.depends_on),
                }
                for s in defn.criteria.scored_services
            ],
            "manual_penalty_categories": list(defn.criteria.manual_penalty_categories),
            "revert_penalty": defn.criteria.revert_penalty,
            "wrong_flag_penalty": defn.criteria.wrong_flag_penalty,
            "free_attempts": defn.criteria.free_attempts,
            "questionnaires": [dict(q) for q in defn.criteria.questionnaires],
        },
    }


def canonical_json(data) -> str:
    """Canonical interchange encoding: sorted keys, compact, UTF-8, trailing LF."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def serialize_definition(defn: TrainingDefinition) -> str:
    return canonical_json(definition_to_dict(defn))


# --- validation -------------------------------------------------------------


def validate_definition(defn: TrainingDefinition) -> ValidationReport:
    """Static checks over a structurally parsed definition.

    Findings are data, not failures; the report is empty of errors iff
    every type invariant holds. Ordering is deterministic: sorted by
    (location, code).
    """
    findings: list[Finding] = []

    def err(code: str, message: str, location: str) -> None:
        findings.append(Finding("error", code, message, location))

    def warn(code: str, message: str, location: str) -> None:
        findings.append(Finding("warning", code, message, location))

    if defn.expected_total_duration <= 0:
        err("NONPOSITIVE_TOTAL_DURATION", "expected_total_duration must be > 0",
            "expected_total_duration")
    if defn.max_participants <= 0:
        err("NONPOSITIVE_MAX_PARTICIPANTS", "max_participants must be > 0", "max_participants")

    if defn.kind == "CTF":
        if not defn.scenario.levels:
            err("CTF_NO_LEVELS", "a CTF definition needs at least one level", "scenario.levels")
        if defn.scenario.attack_plan:
            err("CTF_HAS_ATTACK_PLAN", "a CTF definition must not carry an attack plan",
                "scenario.attack_plan")
    else:
        if not defn.scenario.attack_plan:
            err("CDX_NO_ATTACK_PLAN", "a CDX definition needs a non-empty attack plan",
                "scenario.attack_plan")

    _validate_topology(defn, err)
    _validate_levels(defn, err, warn)
    _validate_attack_plan(defn, err)
    _validate_criteria(defn, err, warn)

    ordered = sorted(findings, key=lambda f: (f.location, f.code))
    return ValidationReport(findings=tuple(ordered))


def _validate_topology(defn: TrainingDefinition, err) -> None:
    seen: set[str] = set()
    node_ids = defn.scenario.topology.node_ids()
    for i, node in enumerate(defn.scenario.topology.nodes):
        loc = f"scenario.topology.nodes[{i}]"
        if node.id in seen:
            err("DUPLICATE_NODE_ID", f"node id '{node.id}' declared more than once", loc)
        seen.add(node.id)
    for i, (a, b) in enumerate(defn.scenario.topology.links):
        loc = f"scenario.topology.links[{i}]"
        if a == b:
            err("SELF_LOOP", f"link from '{a}' to itself", loc)
        for end in (a, b):
            if end not in node_ids:
                err("DANGLING_REFERENCE", f"link endpoint '{end}' is not a declared node", loc)


def _validate_levels(defn: TrainingDefinition, err, warn) -> None:
    levels = defn.scenario.levels
    orders = sorted(lvl.order for lvl in levels)
    if levels and orders != list(range(1, len(levels) + 1)):
        err("LEVEL_ORDER_NOT_CONTIGUOUS",
            f"level orders must form 1..{len(levels)}, got {orders}", "scenario.levels")

    flags_seen: dict[str, str] = {}
    ids_seen: set[str] = set()
    for i, lvl in enumerate(levels):
        loc = f"scenario.levels[{i}]"
        if lvl.id in ids_seen:
            err("DUPLICATE_ID", f"level id '{lvl.id}' declared more than once", loc)
        ids_seen.add(lvl.id)
        if not lvl.flag:
            err("EMPTY_FLAG", "flag must be non-empty", f"{loc}.flag")
        elif lvl.flag in flags_seen:
            err("DUPLICATE_FLAG",
                f"flag shared with level '{flags_seen[lvl.flag]}'", f"{loc}.flag")
        else:
            flags_seen[lvl.flag] = lvl.id
        if lvl.expected_duration <= 0:
            err("NONPOSITIVE_LEVEL_DURATION", "expected_duration must be > 0",
                f"{loc}.expected_duration")
        elif lvl.expected_duration > defn.expected_total_duration:
            warn("LEVEL_DURATION_EXCEEDS_TOTAL",
                 "level expected_duration exceeds the whole training's duration",
                 f"{loc}.expected_duration")
        if lvl.max_points < 0:
            err("NEGATIVE_POINTS", "max_points must be >= 0", f"{loc}.max_points")
        if lvl.skip_penalty < 0:
            err("NEGATIVE_POINTS", "skip_penalty must be >= 0", f"{loc}.skip_penalty")
        hint_ids: set[str] = set()
        hint_sum = 0
        for j, h in enumerate(lvl.hints):
            hloc = f"{loc}.hints[{j}]"
            if h.id in hint_ids:
                err("DUPLICATE_ID", f"hint id '{h.id}' declared more than once", hloc)
            hint_ids.add(h.id)
            if h.penalty_points < 0:
                err("NEGATIVE_POINTS", "penalty_points must be >= 0", f"{hloc}.penalty_points")
            hint_sum += h.penalty_points
        if hint_sum > lvl.max_points:
            err("HINT_PENALTY_SUM_EXCEEDS_MAX",
                f"hint penalties sum to {hint_sum}, exceeding max_points {lvl.max_points}",
                f"{loc}.hints")


def _validate_attack_plan(defn: TrainingDefinition, err) -> None:
    node_ids = defn.scenario.topology.node_ids()
    ids_seen: set[str] = set()
    for i, entry in enumerate(defn.scenario.attack_plan):
        loc = f"scenario.attack_plan[{i}]"
        if entry.id in ids_seen:
            err("DUPLICATE_ID", f"attack id '{entry.id}' declared more than once", loc)
        ids_seen.add(entry.id)
        if not 0 <= entry.scheduled_offset < defn.expected_total_duration:
            err("OFFSET_OUT_OF_RANGE",
                f"scheduled_offset {entry.scheduled_offset} min is outside the "
                f"{defn.expected_total_duration} min exercise", f"{loc}.scheduled_offset")
        if entry.target not in node_ids:
            err("DANGLING_REFERENCE", f"attack target '{entry.target}' is not a declared node",
                f"{loc}.target")
        if entry.penalty_points < 0:
            err("NEGATIVE_POINTS", "penalty_points must be >= 0", f"{loc}.penalty_points")


def _validate_criteria(defn: TrainingDefinition, err, warn) -> None:
    crit = defn.criteria
    cats_seen: set[str] = set()
    for i, cat in enumerate(crit.manual_penalty_categories):
        if cat in cats_seen:
            err("DUPLICATE_CATEGORY", f"category '{cat}' declared more than once",
                f"criteria.manual_penalty_categories[{i}]")
        cats_seen.add(cat)

    node_ids = defn.scenario.topology.node_ids()
    ids_seen: set[str] = set()
    for i, svc in enumerate(crit.scored_services):
        loc = f"criteria.scored_services[{i}]"
        if svc.id in ids_seen:
            err("DUPLICATE_ID", f"service id '{svc.id}' declared more than once", loc)
        ids_seen.add(svc.id)
        if svc.check_interval <= 0:
            err("NONPOSITIVE_CHECK_INTERVAL", "check_interval must be > 0",
                f"{loc}.check_interval")
        if svc.award_per_check < 0 or svc.penalty_per_failed_check < 0:
            err("NEGATIVE_POINTS", "award and penalty must be >= 0", loc)
        if svc.award_per_check == 0 and svc.penalty_per_failed_check == 0:
            err("SERVICE_NEVER_SCORES",
                "at least one of award_per_check/penalty_per_failed_check must be non-zero", loc)
        if svc.node_id not in node_ids:
            err("DANGLING_REFERENCE", f"scored service node '{svc.node_id}' is not declared",
                f"{loc}.node_id")
        else:
            node = defn.scenario.topology.node(svc.node_id)
            if node is not None and svc.service_name not in node.services:
                err("DANGLING_REFERENCE",
                    f"service '{svc.service_name}' is not hosted on node '{svc.node_id}'",
                    f"{loc}.service_name")

    if crit.revert_penalty < 0:
        err("NEGATIVE_POINTS", "revert_penalty must be >= 0", "criteria.revert_penalty")
    if crit.wrong_flag_penalty < 0:
        err("NEGATIVE_POINTS", "wrong_flag_penalty must be >= 0", "criteria.wrong_flag_penalty")
    if crit.free_attempts is not None and crit.free_attempts < 0:
        err("NEGATIVE_POINTS", "free_attempts must be >= 0 or null", "criteria.free_attempts")

    if defn.kind == "CDX" and defn.scenario.attack_plan and not crit.manual_penalty_categories:
        warn("ATTACKS_WITHOUT_MANUAL_CATEGORY",
             "attack plan present but no manual penalty categories to record outcomes under",
             "criteria.manual_penalty_categories")


# --- derived quantities -----------------------------------------------------


def max_achievable_score(defn: TrainingDefinition) -> int:
    """Best possible total: all levels clean (CTF) or all checks up (CDX)."""
    report = validate_definition(defn)
    if not report.ok:
        raise InvalidDefinitionError(
            f"definition has {len(report.errors)} validation error(s); "
            f"first: {report.errors[0].code} at {report.errors[0].location}")
    if defn.kind == "CTF":
        return sum(lvl.max_points for lvl in defn.scenario.levels)
    duration_sec = defn.expected_total_duration * 60.0
    total = 0
    for svc in defn.criteria.scored_services:
        total += svc.award_per_check * math.floor(duration_sec / svc.check_interval)
    return total
