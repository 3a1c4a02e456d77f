"""HTTP/JSON surface over the dispatcher.

Role filtering happens here: designer-facing responses never carry the
reference layout, and the claim context is exactly what the browser
client renders.
"""
from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .dialog import DIRECTOR
from .dispatch import DispatchError, DispatchService
from .layouts import edit_to_dict

_HTTP_STATUS = {
    "unknown-job": 404,
    "unknown-session": 404,
    "unknown-layout": 404,
    "lease-expired": 409,
    "not-lease-holder": 409,
    "job-not-leased": 409,
    "unknown-scenario": 400,
    "unknown-role": 400,
}


class CreateSessionRequest(BaseModel):
    scenario: str
    seed: int | None = None
    layout_id: str | None = None


class ClaimRequest(BaseModel):
    worker_id: str
    role: str


class SubmitRequest(BaseModel):
    worker_id: str
    act: str
    utterance: str = ""
    canvas: dict | None = None
    origin: str = "human"


def _http_error(exc: DispatchError) -> HTTPException:
    return HTTPException(
        status_code=_HTTP_STATUS.get(exc.code, 400),
        detail={"error": exc.code, "message": str(exc)},
    )


def build_app(service: DispatchService) -> FastAPI:
    app = FastAPI(title="dialogdraw dispatch")

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            sid = service.create_session(req.scenario, seed=req.seed, layout_id=req.layout_id)
        except DispatchError as exc:
            raise _http_error(exc)
        state = service.get_state(sid)
        return {"session_id": sid, "scenario": state.scenario, "kind": state.canvas.kind}

    @app.post("/jobs/claim")
    def claim(req: ClaimRequest):
        try:
            context = service.claim_next_job(req.worker_id, req.role)
        except DispatchError as exc:
            raise _http_error(exc)
        return {"job": context}

    @app.post("/jobs/{job_id}/submit")
    def submit(job_id: str, req: SubmitRequest):
        payload = {
            "act": req.act,
            "utterance": req.utterance,
            "canvas": req.canvas,
            "origin": req.origin,
        }
        try:
            result = service.submit_job(job_id, req.worker_id, payload)
        except DispatchError as exc:
            raise _http_error(exc)
        session_id = service._state.jobs[job_id].session_id
        state = service.get_state(session_id)
        return {
            "verdict": result.verdict,
            "notes": list(result.notes),
            "derived_act": result.derived_act.value if result.derived_act else None,
            "derived_edits": [edit_to_dict(e) for e in result.derived_edits],
            "session_status": state.status,
        }

    @app.get("/sessions/{session_id}")
    def session_view(session_id: str, as_: str = Query(DIRECTOR, alias="as")):
        if as_ not in ("director", "designer"):
            raise HTTPException(status_code=400, detail={"error": "unknown-role"})
        try:
            return service.get_session_view(session_id, as_role=as_)
        except DispatchError as exc:
            raise _http_error(exc)

    @app.get("/sessions/{session_id}/transcript", response_class=PlainTextResponse)
    def transcript(session_id: str):
        try:
            turns = service.get_transcript(session_id)
        except DispatchError as exc:
            raise _http_error(exc)
        return "\n".join(json.dumps(t, sort_keys=True) for t in turns)

    @app.get("/workers/{worker_id}/score")
    def worker_score(worker_id: str):
        return service.get_worker_score(worker_id)

    @app.get("/export", response_class=PlainTextResponse)
    def export():
        sessions = service.export_completed()
        return "\n".join(json.dumps(s, sort_keys=True) for s in sessions)

    return app
