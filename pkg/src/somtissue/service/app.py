"""HTTP front end: one tissue pipeline per session, mutated under a lock."""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import PlainTextResponse, Response
from starlette.concurrency import run_in_threadpool

from ..errors import ConfigError, SnapshotError
from ..inflammation import attention, field_csv
from ..pipeline import Pipeline, parse_config
from ..pipeline.records import iter_jsonl
from ..pipeline.snapshot import dumps, read_payload, restore
from ..tissue import grid_csv
from .schemas import (AttentionOut, EventBatch, IngestResult, MetricsOut,
                      SessionCreate, SessionInfo)


@dataclass
class Session:
    pipeline: Pipeline
    lock: threading.Lock = field(default_factory=threading.Lock)


def _info(sid: str, p: Pipeline) -> SessionInfo:
    t = p.tissue
    return SessionInfo(id=sid, step=t.step, width=t.width, height=t.height, dim=t.dim,
                       events_ingested=p.counters.ingested, antigens_emitted=p.counters.emitted)


def create_app() -> FastAPI:
    app = FastAPI(title="somtissue", version="0.1.0")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get(sid: str) -> Session:
        with registry_lock:
            s = sessions.get(sid)
        if s is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return s

    def feed(s: Session, records) -> IngestResult:
        with s.lock:
            before = (s.pipeline.counters.ingested, s.pipeline.counters.skipped)
            antigens = [ag.to_dict() for ag in s.pipeline.ingest_all(records)]
            c = s.pipeline.counters
            return IngestResult(antigens=antigens, ingested=c.ingested - before[0],
                                skipped=c.skipped - before[1])

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(sessions)}

    @app.post("/sessions", response_model=SessionInfo, status_code=201)
    def create_session(req: SessionCreate):
        try:
            cfg = parse_config(req.config)
            if req.snapshot is not None:
                p = restore(read_payload(json.dumps(req.snapshot)), cfg)
            else:
                p = Pipeline(cfg, seed=req.seed)
        except (ConfigError, SnapshotError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        sid = uuid.uuid4().hex
        with registry_lock:
            sessions[sid] = Session(p)
        return _info(sid, p)

    @app.get("/sessions", response_model=list[SessionInfo])
    def list_sessions():
        with registry_lock:
            items = list(sessions.items())
        return [_info(sid, s.pipeline) for sid, s in items]

    @app.get("/sessions/{sid}", response_model=SessionInfo)
    def session_info(sid: str):
        return _info(sid, get(sid).pipeline)

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        with registry_lock:
            if sessions.pop(sid, None) is None:
                raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return Response(status_code=204)

    @app.post("/sessions/{sid}/events", response_model=IngestResult)
    def post_events(sid: str, batch: EventBatch):
        records = [e.model_dump(exclude_none=True) for e in batch.events]
        return feed(get(sid), records)

    @app.post("/sessions/{sid}/ingest", response_model=IngestResult)
    async def ingest_ndjson(sid: str, request: Request):
        """JSON Lines body; malformed lines are counted as skipped, never rejected."""
        s = get(sid)
        body = (await request.body()).decode("utf-8", errors="replace")
        return await run_in_threadpool(feed, s, iter_jsonl(body.splitlines()))

    @app.get("/sessions/{sid}/metrics", response_model=MetricsOut)
    def metrics(sid: str):
        s = get(sid)
        with s.lock:
            return s.pipeline.metrics().to_dict()

    @app.get("/sessions/{sid}/attention", response_model=AttentionOut)
    def attention_report(sid: str, k: int = Query(5, ge=1), floor: float = Query(0.0, ge=0.0)):
        s = get(sid)
        with s.lock:
            return attention(s.pipeline.field, k, floor).to_dict()

    @app.get("/sessions/{sid}/grid", response_class=PlainTextResponse)
    def grid(sid: str):
        s = get(sid)
        with s.lock:
            return PlainTextResponse(grid_csv(s.pipeline.tissue), media_type="text/csv")

    @app.get("/sessions/{sid}/field", response_class=PlainTextResponse)
    def inflammation_field(sid: str):
        s = get(sid)
        with s.lock:
            return PlainTextResponse(field_csv(s.pipeline.field), media_type="text/csv")

    @app.get("/sessions/{sid}/snapshot")
    def snapshot(sid: str):
        s = get(sid)
        with s.lock:
            text = dumps(s.pipeline)
        return Response(content=text, media_type="application/json")

    return app


app = create_app()
