"""HTTP gateway: run management, event ingestion, projections, live stream.

Authentication is one bearer token per participant, issued when the run
is created. Trainees and sparring partners may only post events as
themselves; supervisors and operators may ingest any event, which is how
range telemetry (probes, metrics, system records) enters the log.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from .analytics import detect_trouble, personal_feedback
from .definition import (
    canonical_json,
    definition_from_dict,
    definition_to_dict,
    serialize_definition,
    validate_definition,
)
from .errors import RangehallError
from .events import (
    Participant,
    TrainingRun,
    envelope_to_dict,
    envelope_to_line,
    log_to_jsonl,
    payload_from_dict,
    run_to_dict,
)
from .gateway import RunHandle, RunRegistry, project_role_view, publish_update, run_transactions
from .scoring import build_scoreboard

ROLES_MAY_INGEST_ANY = ("supervisor", "operator")


class StreamHub:
    """Per-run subscriber queues for the SSE channel.

    Each queue remembers the loop it was created on, so a publish from a
    different loop or thread still wakes the subscriber.
    """

    def __init__(self):
        self._subs: dict[str, list[tuple[asyncio.Queue, asyncio.AbstractEventLoop]]] = {}

    def subscribe(self, run_id: str) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue()
        self._subs.setdefault(run_id, []).append((q, asyncio.get_running_loop()))
        return q

    def unsubscribe(self, run_id: str, q: asyncio.Queue) -> None:
        self._subs[run_id] = [(qq, loop) for qq, loop in self._subs.get(run_id, [])
                              if qq is not q]

    def publish(self, run_id: str, notice: dict) -> None:
        try:
            current = asyncio.get_running_loop()
        except RuntimeError:
            current = None
        for q, loop in self._subs.get(run_id, []):
            if loop is current:
                q.put_nowait(notice)
            else:
                loop.call_soon_threadsafe(q.put_nowait, notice)


def create_app(data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="rangehall gateway")
    registry = RunRegistry()
    hub = StreamHub()
    root = Path(data_dir) if data_dir else None
    if root is not None:
        root.mkdir(parents=True, exist_ok=True)
        _load_existing_runs(registry, root)
    app.state.registry = registry
    app.state.hub = hub
    app.state.data_dir = root

    def get_handle(run_id: str) -> RunHandle:
        handle = registry.get(run_id)
        if handle is None:
            raise HTTPException(404, f"unknown run '{run_id}'")
        return handle

    def authed_actor(run_id: str, request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise HTTPException(401, "bearer token required")
        actor = registry.actor_for_token(run_id, header.split(" ", 1)[1].strip())
        if actor is None:
            raise HTTPException(401, "invalid token for this run")
        return actor

    @app.post("/runs", status_code=201)
    async def create_run(body: dict):
        try:
            defn = definition_from_dict(body["definition"])
            report = validate_definition(defn)
            if not report.ok:
                raise HTTPException(422, detail=[
                    {"code": f.code, "message": f.message, "location": f.location}
                    for f in report.errors])
            participants = tuple(
                Participant(p["actor_id"], p["role"], p.get("team_id"))
                for p in body.get("participants", []))
            run_id = body.get("run_id") or f"run-{len(registry.run_ids()) + 1}"
            if registry.get(run_id) is not None:
                raise HTTPException(409, f"run '{run_id}' already exists")
            run = TrainingRun(run_id=run_id, definition_id=defn.id,
                              start_time=float(body.get("start_time", 0.0)),
                              participants=participants)
        except KeyError as err:
            raise HTTPException(422, f"missing field {err}") from None
        except RangehallError as err:
            raise HTTPException(422, str(err)) from None
        handle = registry.create(defn, run)
        if root is not None:
            (root / f"{run_id}.definition.json").write_text(
                serialize_definition(defn), encoding="utf-8")
            (root / f"{run_id}.jsonl").write_text(
                canonical_json(run_to_dict(run)), encoding="utf-8")
        return {
            "run_id": run_id,
            "definition_id": defn.id,
            "tokens": {actor: token for token, actor in handle.tokens.items()},
        }

    @app.get("/runs")
    async def list_runs():
        out = []
        for run_id in registry.run_ids():
            handle = registry.get(run_id)
            out.append({
                "run_id": run_id,
                "definition_id": handle.definition.id,
                "kind": handle.definition.kind,
                "events": len(handle.log),
                "closed": handle.log.run.end_time is not None,
            })
        return out

    @app.get("/runs/{run_id}/definition")
    async def get_definition(run_id: str, request: Request):
        handle = get_handle(run_id)
        authed_actor(run_id, request)
        return definition_to_dict(handle.definition)

    @app.post("/runs/{run_id}/events", status_code=201)
    async def ingest_event(run_id: str, body: dict, request: Request):
        handle = get_handle(run_id)
        poster = authed_actor(run_id, request)
        poster_role = handle.log.run.participant(poster).role
        try:
            actor_id = body["actor_id"]
            payload = payload_from_dict(body["payload"])
            timestamp = float(body["timestamp"])
        except (KeyError, TypeError, ValueError) as err:
            raise HTTPException(422, f"malformed event: {err}") from None
        if actor_id != poster and poster_role not in ROLES_MAY_INGEST_ANY:
            raise HTTPException(403, "only supervisors/operators may post events "
                                     "for other actors")
        try:
            envelope = handle.log.append(timestamp, actor_id, payload)
        except RangehallError as err:
            raise HTTPException(422, str(err)) from None
        if root is not None:
            with open(root / f"{run_id}.jsonl", "a", encoding="utf-8") as fh:
                fh.write(envelope_to_line(envelope))
        channels = publish_update(handle.log, envelope)
        hub.publish(run_id, {
            "seq": envelope.seq,
            "timestamp": envelope.timestamp,
            "channels": sorted([role, actor] for role, actor in channels),
        })
        return envelope_to_dict(envelope)

    @app.post("/runs/{run_id}/close")
    async def close_run(run_id: str, body: dict, request: Request):
        handle = get_handle(run_id)
        poster = authed_actor(run_id, request)
        if handle.log.run.participant(poster).role not in ROLES_MAY_INGEST_ANY:
            raise HTTPException(403, "only supervisors/operators may close a run")
        try:
            run = handle.log.close(float(body["end_time"]))
        except (KeyError, ValueError) as err:
            raise HTTPException(422, str(err)) from None
        except RangehallError as err:
            raise HTTPException(409, str(err)) from None
        if root is not None:
            with open(root / f"{run_id}.jsonl", "a", encoding="utf-8") as fh:
                fh.write(canonical_json({"type": "run_closed", "end_time": run.end_time}))
        hub.publish(run_id, {"closed": True, "end_time": run.end_time})
        return {"run_id": run_id, "end_time": run.end_time}

    @app.get("/runs/{run_id}/view")
    async def get_view(run_id: str, request: Request, role: str = Query(...),
                       actor: str = Query(...), as_of: float | None = None):
        handle = get_handle(run_id)
        poster = authed_actor(run_id, request)
        if poster != actor:
            raise HTTPException(403, "token does not belong to the requested actor")
        when = as_of if as_of is not None else _latest_time(handle)
        try:
            view = project_role_view(handle.log, (actor, role), when)
        except RangehallError as err:
            raise HTTPException(403, str(err)) from None
        return {"run_id": run_id, "as_of": view.as_of, "kind": view.kind,
                "payload": view.payload}

    @app.get("/runs/{run_id}/scoreboard")
    async def get_scoreboard(run_id: str, request: Request, as_of: float | None = None):
        handle = get_handle(run_id)
        authed_actor(run_id, request)
        when = as_of if as_of is not None else _latest_time(handle)
        events = [ev for ev in handle.log.events() if ev.timestamp <= when]
        board = build_scoreboard(run_transactions(handle.definition, handle.log.run, events))
        return {
            "run_id": run_id,
            "as_of": when,
            "rows": [{"subject": r.subject, "total": r.total,
                      "per_category": dict(r.per_category)} for r in board.rows],
        }

    @app.get("/runs/{run_id}/alerts")
    async def get_alerts(run_id: str, request: Request, as_of: float | None = None):
        handle = get_handle(run_id)
        poster = authed_actor(run_id, request)
        if handle.log.run.participant(poster).role not in ("supervisor", "operator",
                                                           "sparring_partner"):
            raise HTTPException(403, "alerts are restricted to organizing participants")
        when = as_of if as_of is not None else _latest_time(handle)
        return [
            {"actor_id": a.actor_id, "level_id": a.level_id, "kind": a.kind,
             "evidence": a.evidence, "raised_at": a.raised_at}
            for a in detect_trouble(handle.log, when)
        ]

    @app.get("/runs/{run_id}/feedback/{actor}")
    async def get_feedback(run_id: str, actor: str, request: Request):
        handle = get_handle(run_id)
        poster = authed_actor(run_id, request)
        poster_role = handle.log.run.participant(poster).role
        if poster != actor and poster_role != "supervisor":
            raise HTTPException(403, "feedback is personal; supervisors may view any")
        try:
            fb = personal_feedback(handle.log, actor)
        except RangehallError as err:
            raise HTTPException(409, str(err)) from None
        return {
            "actor_id": fb.actor_id,
            "subject": fb.subject,
            "total_score": fb.total_score,
            "rank": fb.rank,
            "cohort_size": fb.cohort_size,
            "per_level": [
                {"level_id": r.level_id, "time_spent": r.time_spent,
                 "hints_taken": r.hints_taken, "wrong_flags": r.wrong_flags,
                 "score_delta": r.score_delta, "outcome": r.outcome}
                for r in fb.per_level
            ],
            "cohort_stats": [
                {"level_id": s.level_id, "slowest_time": s.slowest_time,
                 "mean_time": s.mean_time}
                for s in fb.cohort_stats
            ],
        }

    @app.get("/runs/{run_id}/events")
    async def get_events(run_id: str, request: Request):
        handle = get_handle(run_id)
        poster = authed_actor(run_id, request)
        if handle.log.run.participant(poster).role not in ROLES_MAY_INGEST_ANY:
            raise HTTPException(403, "raw log access is restricted to "
                                     "supervisors/operators")
        return StreamingResponse(iter([log_to_jsonl(handle.log)]),
                                 media_type="application/jsonl")

    @app.get("/runs/{run_id}/stream")
    async def stream(run_id: str, request: Request):
        handle = get_handle(run_id)
        authed_actor(run_id, request)

        async def event_source():
            q = hub.subscribe(run_id)
            hello = json.dumps({"run_id": run_id, "events": len(handle.log)})
            try:
                yield f"event: hello\ndata: {hello}\n\n"
                while True:
                    try:
                        notice = await asyncio.wait_for(q.get(), timeout=15.0)
                    except asyncio.TimeoutError:
                        yield ": keep-alive\n\n"
                        continue
                    yield f"event: refresh\ndata: {json.dumps(notice, sort_keys=True)}\n\n"
                    if notice.get("closed"):
                        return
            finally:
                hub.unsubscribe(run_id, q)

        return StreamingResponse(event_source(), media_type="text/event-stream",
                                 headers={"cache-control": "no-store"})

    static_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")
    return app


def _latest_time(handle: RunHandle) -> float:
    events = handle.log.events()
    if handle.log.run.end_time is not None:
        return handle.log.run.end_time
    return events[-1].timestamp if events else handle.log.run.start_time


def _load_existing_runs(registry: RunRegistry, root: Path) -> None:
    from .events import log_from_jsonl

    for log_path in sorted(root.glob("*.jsonl")):
        def_path = root / f"{log_path.stem}.definition.json"
        if not def_path.exists():
            continue
        defn = definition_from_dict(json.loads(def_path.read_text(encoding="utf-8")))
        log = log_from_jsonl(log_path.read_text(encoding="utf-8"), defn)
        registry.adopt(defn, log)
