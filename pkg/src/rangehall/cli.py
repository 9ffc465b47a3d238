"""Command-line surface: validate, simulate, score, analyze, serve.

Exit codes: 0 success, 1 validation/operational errors, 2 usage errors
(argparse's own convention).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict

import yaml

from .analytics import (
    behavior_analysis,
    communication_centrality,
    compare_definitions,
    definition_quality_report,
    infrastructure_report,
    personal_feedback,
)
from .definition import canonical_json, parse_definition, validate_definition
from .errors import RangehallError
from .events import read_log, write_log
from .gateway import run_transactions
from .scoring import build_scoreboard, transactions_to_jsonl
from .simulate import SimulationConfig, TraineeProfile, simulate_cdx_run, simulate_ctf_run

DEFAULT_PORT = 8008


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RangehallError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rangehall",
                                     description="cyber-range training analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a training definition")
    p_validate.add_argument("definition")
    p_validate.set_defaults(func=cmd_validate)

    p_sim = sub.add_parser("simulate", help="generate a synthetic training run")
    p_sim.add_argument("definition")
    p_sim.add_argument("--config", help="simulation config file (YAML or JSON)")
    p_sim.add_argument("--out", required=True, help="event log output path (JSON Lines)")
    p_sim.add_argument("--seed", type=int, help="override the config seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_score = sub.add_parser("score", help="score an event log")
    p_score.add_argument("definition")
    p_score.add_argument("log")
    p_score.add_argument("--transactions", help="also write transactions (JSON Lines)")
    p_score.add_argument("--json", action="store_true", help="canonical JSON output")
    p_score.set_defaults(func=cmd_score)

    p_an = sub.add_parser("analyze", help="reflection-phase reports")
    an_sub = p_an.add_subparsers(dest="report", required=True)

    p_fb = an_sub.add_parser("feedback", help="personal feedback for one trainee")
    p_fb.add_argument("definition")
    p_fb.add_argument("log")
    p_fb.add_argument("--actor", required=True)
    p_fb.add_argument("--json", action="store_true")
    p_fb.set_defaults(func=cmd_feedback)

    p_q = an_sub.add_parser("quality", help="definition quality over closed runs")
    p_q.add_argument("definition")
    p_q.add_argument("logs", nargs="+")
    p_q.add_argument("--json", action="store_true")
    p_q.set_defaults(func=cmd_quality)

    p_cmp = an_sub.add_parser("compare", help="which of two definitions is harder")
    p_cmp.add_argument("--definition-a", required=True)
    p_cmp.add_argument("--runs-a", required=True, nargs="+")
    p_cmp.add_argument("--definition-b", required=True)
    p_cmp.add_argument("--runs-b", required=True, nargs="+")
    p_cmp.add_argument("--json", action="store_true")
    p_cmp.set_defaults(func=cmd_compare)

    p_bh = an_sub.add_parser("behavior", help="directly-follows graph and anomalies")
    p_bh.add_argument("definition")
    p_bh.add_argument("logs", nargs="+")
    p_bh.add_argument("--level-qualified", action="store_true")
    p_bh.add_argument("--communication", action="store_true",
                      help="also report message-graph centrality (first log)")
    p_bh.add_argument("--json", action="store_true")
    p_bh.set_defaults(func=cmd_behavior)

    p_inf = an_sub.add_parser("infra", help="uptime, MTTF, utilization")
    p_inf.add_argument("definition")
    p_inf.add_argument("logs", nargs="+")
    p_inf.add_argument("--json", action="store_true")
    p_inf.set_defaults(func=cmd_infra)

    p_serve = sub.add_parser("serve", help="run the HTTP gateway")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--data-dir", default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def _load_definition(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_definition(fh.read())


def _emit(data: dict, as_json: bool, table: str) -> None:
    if as_json:
        sys.stdout.write(canonical_json(data))
    else:
        print(table)


# --- commands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    defn = _load_definition(args.definition)
    report = validate_definition(defn)
    for f in report.findings:
        print(f"{f.severity:7s} {f.code:32s} {f.location}: {f.message}")
    if report.ok:
        print(f"OK: '{defn.id}' ({defn.kind}) valid, "
              f"{len(report.warnings)} warning(s)")
        return 0
    print(f"INVALID: {len(report.errors)} error(s)", file=sys.stderr)
    return 1


def cmd_simulate(args) -> int:
    defn = _load_definition(args.definition)
    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh.read()) or {}
    if args.seed is not None:
        raw["seed"] = args.seed
    profiles = [TraineeProfile(**p) for p in raw.pop("profiles", [])]
    config = SimulationConfig(**{k: v for k, v in raw.items()
                                 if k in SimulationConfig.__dataclass_fields__})
    if defn.kind == "CTF":
        if not profiles:
            profiles = [TraineeProfile(f"trainee-{i}", skill=s)
                        for i, s in enumerate((0.3, 0.5, 0.7, 0.9), start=1)]
        run, log = simulate_ctf_run(defn, profiles, config)
    else:
        run, log = simulate_cdx_run(defn, config)
    write_log(log, args.out)
    print(f"simulated run '{run.run_id}': {len(log)} events -> {args.out}")
    return 0


def cmd_score(args) -> int:
    defn = _load_definition(args.definition)
    log = read_log(args.log, defn)
    txs = run_transactions(defn, log.run, list(log.events()))
    board = build_scoreboard(txs)
    if args.transactions:
        with open(args.transactions, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(transactions_to_jsonl(txs))
    data = {"run_id": log.run.run_id,
            "rows": [{"subject": r.subject, "total": r.total,
                      "per_category": dict(r.per_category)} for r in board.rows]}
    lines = [f"{'subject':20s} {'total':>8s}  per-category"]
    for r in board.rows:
        cats = ", ".join(f"{k}={v:+d}" for k, v in r.per_category.items())
        lines.append(f"{r.subject:20s} {r.total:8d}  {cats}")
    _emit(data, args.json, "\n".join(lines))
    return 0


def cmd_feedback(args) -> int:
    defn = _load_definition(args.definition)
    log = read_log(args.log, defn)
    fb = personal_feedback(log, args.actor)
    data = asdict(fb)
    lines = [f"feedback for {fb.actor_id} (subject {fb.subject}): "
             f"total {fb.total_score}, rank {fb.rank}/{fb.cohort_size}"]
    lines.append(f"{'level':10s} {'outcome':12s} {'time':>8s} {'hints':>6s} "
                 f"{'wrong':>6s} {'delta':>7s}")
    for row in fb.per_level:
        spent = f"{row.time_spent / 60:.1f}m" if row.time_spent is not None else "-"
        lines.append(f"{row.level_id:10s} {row.outcome:12s} {spent:>8s} "
                     f"{row.hints_taken:6d} {row.wrong_flags:6d} {row.score_delta:+7d}")
    _emit(data, args.json, "\n".join(lines))
    return 0


def cmd_quality(args) -> int:
    defn = _load_definition(args.definition)
    logs = [read_log(path, defn) for path in args.logs]
    report = definition_quality_report(defn, logs)
    data = asdict(report)
    data["overall_completion_rate"] = report.overall_completion_rate
    data["mean_time_ratio"] = report.mean_time_ratio
    lines = [f"quality of '{report.definition_id}' over {report.run_count} run(s)"]
    lines.append(f"{'level':10s} {'starters':>8s} {'complete':>9s} {'median':>8s} "
                 f"{'ratio':>6s} {'hints':>6s}  label")
    for lq in report.per_level:
        med = f"{lq.median_time / 60:.1f}m" if lq.median_time is not None else "-"
        ratio = f"{lq.time_ratio:.2f}" if lq.time_ratio is not None else "-"
        lines.append(f"{lq.level_id:10s} {lq.starters:8d} {lq.completion_rate:9.2f} "
                     f"{med:>8s} {ratio:>6s} {lq.hint_usage_rate:6.2f}  "
                     f"{lq.difficulty_label}")
    for f in report.correctness_findings:
        lines.append(f"finding {f.code}: {f.message}")
    _emit(data, args.json, "\n".join(lines))
    return 0


def cmd_compare(args) -> int:
    defn_a = _load_definition(args.definition_a)
    defn_b = _load_definition(args.definition_b)
    ra = definition_quality_report(defn_a, [read_log(p, defn_a) for p in args.runs_a])
    rb = definition_quality_report(defn_b, [read_log(p, defn_b) for p in args.runs_b])
    cmp = compare_definitions(ra, rb)
    data = asdict(cmp)
    data["a"] = defn_a.id
    data["b"] = defn_b.id
    harder = {"a": defn_a.id, "b": defn_b.id}.get(cmp.harder, "indistinguishable")
    table = (f"harder: {harder}\n"
             f"completion delta (a-b): {cmp.completion_delta:+.3f}\n"
             f"time-ratio delta (a-b): "
             + (f"{cmp.time_ratio_delta:+.3f}" if cmp.time_ratio_delta is not None else "n/a"))
    _emit(data, args.json, table)
    return 0


def cmd_behavior(args) -> int:
    defn = _load_definition(args.definition)
    logs = [read_log(path, defn) for path in args.logs]
    graph = behavior_analysis(logs, level_qualified=args.level_qualified)
    data = {
        "nodes": graph.nodes,
        "edges": [{"from": a, "to": b, "count": c} for (a, b), c in sorted(graph.edges.items())],
        "anomaly_scores": graph.anomaly_scores,
    }
    lines = ["directly-follows graph"]
    for (a, b), c in sorted(graph.edges.items(), key=lambda kv: -kv[1]):
        lines.append(f"  {a} -> {b}: {c}")
    lines.append("anomaly z-scores (total active time)")
    for key, z in sorted(graph.anomaly_scores.items()):
        lines.append(f"  {key}: {z:+.2f}")
    if args.communication:
        comm = communication_centrality(logs[0])
        data["communication"] = {
            "stats": {a: {"degree": s.degree, "weighted_degree": s.weighted_degree}
                      for a, s in comm.stats.items()},
            "leader_candidates": {t: list(c) for t, c in comm.leader_candidates.items()},
        }
        lines.append("communication leaders per team")
        for team, cands in comm.leader_candidates.items():
            lines.append(f"  {team}: {', '.join(cands) or '-'}")
    _emit(data, args.json, "\n".join(lines))
    return 0


def cmd_infra(args) -> int:
    defn = _load_definition(args.definition)
    logs = [read_log(path, defn) for path in args.logs]
    report = infrastructure_report(logs)
    data = asdict(report)
    lines = ["service uptime"]
    for s in report.services:
        lines.append(f"  {s.service_id}: {s.uptime_fraction:.3f} "
                     f"({s.up_probes}/{s.probes} up)")
    lines.append("node reliability")
    for n in report.nodes:
        mttf = f"{n.mttf_hours:.2f} h" if n.mttf_hours is not None else "no estimate"
        lines.append(f"  {n.node_id}: {n.failure_count} failure(s), MTTF {mttf}")
    lines.append("utilization (p50/p95/max)")
    for u in report.utilization:
        lines.append(f"  {u.node_id}: cpu {u.cpu.p50:.0f}/{u.cpu.p95:.0f}/{u.cpu.max:.0f}  "
                     f"mem {u.memory.p50:.0f}/{u.memory.p95:.0f}/{u.memory.max:.0f}")
    _emit(data, args.json, "\n".join(lines))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    port = args.port if args.port is not None else int(os.environ.get(
        "RANGEHALL_PORT", DEFAULT_PORT))
    data_dir = args.data_dir if args.data_dir is not None else os.environ.get(
        "RANGEHALL_DATA_DIR")
    app = create_app(data_dir=data_dir)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
