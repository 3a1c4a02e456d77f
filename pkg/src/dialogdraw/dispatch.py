"""Job dispatcher: sessions, per-turn jobs with exclusive leases, probes,
worker scores, and an event-sourced store.

Every mutation is an event; live state is maintained by folding each event
as it commits, so :func:`replay_events` reproduces the exact same state
from the log alone.  Commands hold one lock, which serializes all sessions
(a stricter guarantee than the per-session ordering the protocol needs).
"""
from __future__ import annotations

import json
import os
import random
import threading
import time
from dataclasses import asdict, dataclass, replace

from .agents import (
    PROBE_KINDS,
    Probe,
    ProbeUnavailable,
    WorkerScore,
    make_probe,
    probe_from_dict,
    probe_to_dict,
    score_response,
)
from .coco import ingest_coco_annotations
from .dialog import (
    AWAITING_DESIGNER,
    AWAITING_DIRECTOR,
    COMPLETED,
    DESIGNER,
    DIRECTOR,
    DialogAct,
    DialogState,
    Turn,
    append_turn,
    check_termination,
    legal_acts,
    new_session,
    turn_from_dict,
    turn_to_dict,
)
from .events import Event, EventLog, check_dense, parse_event_lines
from .layouts import (
    KIND_SHAPE2D,
    SCENARIO_PATTERN,
    SCENARIO_RANDOM,
    COCO_SCENARIOS,
    Layout,
    generate_pattern_shape_layout,
    generate_random_shape_layout,
    layout_from_dict,
    layout_to_dict,
)
from .nlp import ACCEPTED, REJECTED, ValidationResult, validate_submission

JOB_OPEN = "open"
JOB_LEASED = "leased"
JOB_SUBMITTED = "submitted"
JOB_VALIDATED = "validated"
JOB_REJECTED = "rejected"


class DispatchError(Exception):
    def __init__(self, code: str, message: str | None = None):
        super().__init__(message or code)
        self.code = code


@dataclass
class ServiceConfig:
    lease_minutes: float = 10.0
    probe_probability: float = 0.15
    probe_max_per_session: int = 2
    port: int = 8080
    data_dir: str | None = None

    @classmethod
    def from_file(cls, path: str) -> "ServiceConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {k: raw[k] for k in cls.__dataclass_fields__ if k in raw}
        return cls(**known)


@dataclass
class Job:
    job_id: str
    session_id: str
    role: str
    turn_index: int
    state: str = JOB_OPEN
    worker: str | None = None
    lease_expires: float | None = None
    probe: Probe | None = None


class SteppingClock:
    """Deterministic clock for tests and self-play; advances on demand."""

    def __init__(self, start: float = 0.0):
        self.t = start

    def now(self) -> float:
        return self.t

    def advance(self, seconds: float) -> float:
        self.t += seconds
        return self.t


class _State:
    """Everything the event reducer owns.  Commands never touch it directly."""

    def __init__(self):
        self.sessions: dict[str, DialogState] = {}
        self.jobs: dict[str, Job] = {}
        self.scores: dict[str, WorkerScore] = {}
        self.probe_counts: dict[str, int] = {}
        self.session_counter = 0
        self.job_counter = 0

    def score_for(self, worker_id: str) -> WorkerScore:
        if worker_id not in self.scores:
            self.scores[worker_id] = WorkerScore(worker_id=worker_id)
        return self.scores[worker_id]


def _apply_event(state: _State, event: Event) -> None:
    """Pure-fold reducer; replay and live mutation share this code path."""
    kind, p = event.kind, event.payload
    if kind == "session_created":
        sid = p["session_id"]
        reference = layout_from_dict(p["reference"])
        state.sessions[sid] = new_session(reference, session_id=sid)
        state.probe_counts[sid] = 0
        state.session_counter = max(state.session_counter, int(sid[1:]))
    elif kind == "job_opened":
        job = Job(
            job_id=p["job_id"],
            session_id=p["session_id"],
            role=p["role"],
            turn_index=p["turn_index"],
        )
        state.jobs[job.job_id] = job
        state.job_counter = max(state.job_counter, int(job.job_id[1:]))
    elif kind == "job_leased":
        job = state.jobs[p["job_id"]]
        job.state = JOB_LEASED
        job.worker = p["worker_id"]
        job.lease_expires = p["expires_at"]
    elif kind == "probe_injected":
        job = state.jobs[p["job_id"]]
        job.probe = probe_from_dict(p["probe"])
        state.probe_counts[p["session_id"]] += 1
        state.score_for(p["worker_id"]).probes_seen += 1
    elif kind == "turn_submitted":
        state.jobs[p["job_id"]].state = JOB_SUBMITTED
    elif kind == "turn_validated":
        job = state.jobs[p["job_id"]]
        job.state = JOB_VALIDATED
        turn = turn_from_dict(p["turn"])
        state.sessions[job.session_id] = append_turn(state.sessions[job.session_id], turn)
        score = state.score_for(p["worker_id"])
        score.tasks_contributed += 1
        if p["verdict"] != ACCEPTED:
            score.flags += 1
        if p.get("probe_pass") is not None and p["probe_pass"]:
            score.probes_passed += 1
    elif kind == "turn_rejected":
        job = state.jobs[p["job_id"]]
        job.state = JOB_REJECTED
        job.worker = None
        job.lease_expires = None
        state.score_for(p["worker_id"]).flags += 1
    elif kind == "lease_expired":
        job = state.jobs[p["job_id"]]
        job.state = JOB_OPEN
        job.worker = None
        job.lease_expires = None
    elif kind == "session_completed":
        pass  # the CONFIRM_DONE turn already completed the DialogState
    else:  # pragma: no cover - EventLog.append filters kinds
        raise ValueError(f"unknown event kind {kind!r}")


class DispatchService:
    def __init__(
        self,
        config: ServiceConfig | None = None,
        clock=time.time,
        rng_seed: int = 0,
        log_events: bool = True,
    ):
        self.config = config or ServiceConfig()
        self._clock = clock
        self._rng = random.Random(rng_seed)
        self._lock = threading.RLock()
        self._state = _State()
        self._layouts: dict[str, Layout] = {}
        if log_events and self.config.data_dir:
            sink = os.path.join(self.config.data_dir, "events.jsonl")
            self._log = EventLog.resume(sink)
            for event in self._log.events:
                _apply_event(self._state, event)
        else:
            self._log = EventLog()

    # -- plumbing -----------------------------------------------------------

    def _commit(self, kind: str, payload: dict) -> Event:
        event = self._log.append(kind, payload, timestamp=self._clock())
        _apply_event(self._state, event)
        return event

    @property
    def events(self) -> tuple[Event, ...]:
        return self._log.events

    def session_ids(self) -> list[str]:
        with self._lock:
            return list(self._state.sessions)

    def get_state(self, session_id: str) -> DialogState:
        with self._lock:
            try:
                return self._state.sessions[session_id]
            except KeyError:
                raise DispatchError("unknown-session", session_id) from None

    def _session_class_lexicon(self, session: DialogState) -> tuple:
        if session.canvas.kind == KIND_SHAPE2D:
            return ()
        labels = {o.class_label for o in session.reference.objects}
        labels.update(o.class_label for o in session.canvas.objects)
        return tuple(sorted(labels))

    # -- layout registry (static input data, outside the event-sourced state)

    def register_layout(self, layout: Layout, layout_id: str | None = None) -> str:
        with self._lock:
            layout_id = layout_id or f"L{len(self._layouts) + 1}"
            self._layouts[layout_id] = layout
            return layout_id

    def ingest_annotations(self, document, scenario: str) -> list[str]:
        layouts = ingest_coco_annotations(document, scenario)
        return [self.register_layout(lay) for lay in layouts]

    def layout_ids(self) -> list[str]:
        with self._lock:
            return list(self._layouts)

    # -- commands -----------------------------------------------------------

    def create_session(self, scenario: str, seed: int | None = None,
                       layout_id: str | None = None) -> str:
        with self._lock:
            if scenario == SCENARIO_RANDOM:
                reference = generate_random_shape_layout(seed if seed is not None else 0)
            elif scenario == SCENARIO_PATTERN:
                reference = generate_pattern_shape_layout(seed if seed is not None else 0)
            elif scenario in COCO_SCENARIOS:
                if layout_id is None or layout_id not in self._layouts:
                    raise DispatchError("unknown-layout", f"layout {layout_id!r} not registered")
                reference = self._layouts[layout_id]
                if reference.scenario != scenario:
                    raise DispatchError("unknown-layout", f"{layout_id} is not a {scenario} layout")
            else:
                raise DispatchError("unknown-scenario", scenario)
            sid = f"s{self._state.session_counter + 1}"
            self._commit("session_created", {
                "session_id": sid,
                "scenario": scenario,
                "seed": seed,
                "reference": layout_to_dict(reference),
            })
            self._open_job(sid, DIRECTOR, 0)
            return sid

    def _open_job(self, session_id: str, role: str, turn_index: int) -> str:
        jid = f"j{self._state.job_counter + 1}"
        self._commit("job_opened", {
            "job_id": jid,
            "session_id": session_id,
            "role": role,
            "turn_index": turn_index,
        })
        return jid

    def _eligible(self, job: Job, worker_id: str, now: float) -> bool:
        if job.state != JOB_OPEN:
            return False
        session = self._state.sessions[job.session_id]
        if session.status not in (AWAITING_DIRECTOR, AWAITING_DESIGNER):
            return False
        if session.transcript and session.transcript[-1].author == worker_id:
            return False  # never respond to your own previous turn
        for other in self._state.jobs.values():
            if (
                other.session_id == job.session_id
                and other.state == JOB_LEASED
                and other.worker == worker_id
                and other.lease_expires is not None
                and other.lease_expires >= now
            ):
                return False  # one role per session at a time
        return True

    def claim_next_job(self, worker_id: str, role: str) -> dict | None:
        if role not in (DIRECTOR, DESIGNER):
            raise DispatchError("unknown-role", role)
        with self._lock:
            now = self._clock()
            job = next(
                (
                    j for j in self._state.jobs.values()
                    if j.role == role and self._eligible(j, worker_id, now)
                ),
                None,
            )
            if job is None:
                return None
            expires = now + self.config.lease_minutes * 60.0
            self._commit("job_leased", {
                "job_id": job.job_id,
                "worker_id": worker_id,
                "expires_at": expires,
            })
            if (
                role == DESIGNER
                and job.probe is None
                and self._state.probe_counts[job.session_id] < self.config.probe_max_per_session
                and self._rng.random() < self.config.probe_probability
            ):
                probe = self._build_probe(job)
                if probe is not None:
                    self._commit("probe_injected", {
                        "job_id": job.job_id,
                        "session_id": job.session_id,
                        "worker_id": worker_id,
                        "probe": probe_to_dict(probe),
                    })
            return self._job_context(self._state.jobs[job.job_id])

    def _build_probe(self, job: Job) -> Probe | None:
        session = self._state.sessions[job.session_id]
        lexicon = self._session_class_lexicon(session)
        kinds = list(PROBE_KINDS)
        self._rng.shuffle(kinds)
        for kind in kinds:
            try:
                return make_probe(
                    session.canvas, kind, self._rng.randrange(2**31),
                    class_lexicon=lexicon, injected_at=job.turn_index,
                )
            except ProbeUnavailable:
                continue
        return None

    def _job_context(self, job: Job) -> dict:
        session = self._state.sessions[job.session_id]
        context = {
            "job_id": job.job_id,
            "session_id": job.session_id,
            "role": job.role,
            "turn_index": job.turn_index,
            "lease_expires_at": job.lease_expires,
            "scenario": session.scenario,
            "kind": session.canvas.kind,
            "history": [turn_to_dict(t) for t in session.transcript],
            "canvas": layout_to_dict(session.canvas),
            "legal_acts": sorted(a.value for a in legal_acts(session)),
        }
        if job.role == DIRECTOR:
            context["reference"] = layout_to_dict(session.reference)
            context["match_now"] = check_termination(session).match_now
        else:
            instruction = None
            if job.probe is not None:
                instruction = job.probe.utterance
            else:
                last = next((t for t in reversed(session.transcript) if t.role == DIRECTOR), None)
                instruction = last.utterance if last else None
            context["instruction"] = instruction
        return context

    def submit_job(self, job_id: str, worker_id: str, payload: dict) -> ValidationResult:
        with self._lock:
            job = self._state.jobs.get(job_id)
            if job is None:
                raise DispatchError("unknown-job", job_id)
            if job.state != JOB_LEASED:
                raise DispatchError("job-not-leased", f"job {job_id} is {job.state}")
            now = self._clock()
            if job.lease_expires is not None and job.lease_expires < now:
                self._commit("lease_expired", {"job_id": job_id, "worker_id": job.worker})
                raise DispatchError("lease-expired", f"lease on {job_id} expired")
            if job.worker != worker_id:
                raise DispatchError("not-lease-holder", f"{worker_id} does not hold {job_id}")

            session = self._state.sessions[job.session_id]
            self._commit("turn_submitted", {
                "job_id": job_id,
                "worker_id": worker_id,
                "act": payload.get("act"),
                "utterance": payload.get("utterance", ""),
            })

            result, turn = self._validate_payload(session, job, worker_id, payload, now)
            if result.verdict == REJECTED:
                self._commit("turn_rejected", {
                    "job_id": job_id,
                    "worker_id": worker_id,
                    "notes": list(result.notes),
                })
                self._open_job(job.session_id, job.role, job.turn_index)
                return result

            probe_pass = None
            if job.probe is not None:
                probe_pass = score_response(job.probe, turn) == "pass"
            self._commit("turn_validated", {
                "job_id": job_id,
                "worker_id": worker_id,
                "turn": turn_to_dict(turn),
                "verdict": result.verdict,
                "notes": list(result.notes),
                "probe_pass": probe_pass,
            })
            session = self._state.sessions[job.session_id]
            if session.status == COMPLETED:
                self._commit("session_completed", {"session_id": job.session_id})
            else:
                next_role = DIRECTOR if session.status == AWAITING_DIRECTOR else DESIGNER
                self._open_job(job.session_id, next_role, job.turn_index + 1)
            return result

    def _validate_payload(
        self, session: DialogState, job: Job, worker_id: str, payload: dict, now: float
    ) -> tuple[ValidationResult, Turn | None]:
        try:
            act = DialogAct(payload.get("act"))
        except ValueError:
            return ValidationResult(REJECTED, notes=(f"unknown-act: {payload.get('act')!r}",)), None
        if payload.get("canvas") is not None:
            try:
                canvas_after = layout_from_dict(payload["canvas"])
            except (KeyError, TypeError, ValueError) as exc:
                return ValidationResult(REJECTED, notes=(f"malformed-canvas: {exc}",)), None
        else:
            canvas_after = session.canvas
        proposed = Turn(
            index=job.turn_index,
            role=job.role,
            act=act,
            utterance=payload.get("utterance", ""),
            edits=(),
            canvas_after=canvas_after,
            author=worker_id,
            origin=payload.get("origin", "human"),
            timestamp=now,
        )
        result = validate_submission(
            session, proposed,
            probe=job.probe,
            class_lexicon=self._session_class_lexicon(session),
        )
        return result, replace(proposed, edits=result.derived_edits)

    def expire_leases(self, now: float | None = None) -> int:
        with self._lock:
            now = self._clock() if now is None else now
            expired = [
                j for j in self._state.jobs.values()
                if j.state == JOB_LEASED and j.lease_expires is not None and j.lease_expires < now
            ]
            for job in expired:
                self._commit("lease_expired", {"job_id": job.job_id, "worker_id": job.worker})
            return len(expired)

    # -- read-side views ----------------------------------------------------

    def get_session_view(self, session_id: str, as_role: str = DIRECTOR) -> dict:
        with self._lock:
            session = self.get_state(session_id)
            term = check_termination(session)
            view = {
                "session_id": session_id,
                "scenario": session.scenario,
                "kind": session.canvas.kind,
                "status": session.status,
                "round_count": session.round_count,
                "turn_count": len(session.transcript),
                "history": [turn_to_dict(t) for t in session.transcript],
                "canvas": layout_to_dict(session.canvas),
            }
            awaiting_role = {AWAITING_DIRECTOR: DIRECTOR, AWAITING_DESIGNER: DESIGNER}.get(
                session.status
            )
            if awaiting_role == as_role:
                view["legal_acts"] = sorted(a.value for a in legal_acts(session))
            if as_role == DIRECTOR:
                view["reference"] = layout_to_dict(session.reference)
                view["match_now"] = term.match_now
            return view

    def get_transcript(self, session_id: str) -> list[dict]:
        with self._lock:
            return [turn_to_dict(t) for t in self.get_state(session_id).transcript]

    def get_worker_score(self, worker_id: str) -> dict:
        with self._lock:
            score = self._state.scores.get(worker_id) or WorkerScore(worker_id=worker_id)
            out = asdict(score)
            out["qualified"] = True  # reserved for quiz-based onboarding
            return out

    def export_completed(self) -> list[dict]:
        with self._lock:
            out = []
            for sid, session in self._state.sessions.items():
                if session.status != COMPLETED:
                    continue
                out.append({
                    "session_id": sid,
                    "scenario": session.scenario,
                    "kind": session.canvas.kind,
                    "completed": True,
                    "reference": layout_to_dict(session.reference),
                    "turns": [turn_to_dict(t) for t in session.transcript],
                })
            return out

    # -- canonical snapshot and replay ---------------------------------------

    def state_snapshot(self) -> dict:
        with self._lock:
            sessions = {}
            for sid, s in self._state.sessions.items():
                sessions[sid] = {
                    "scenario": s.scenario,
                    "status": s.status,
                    "round_count": s.round_count,
                    "reference": layout_to_dict(s.reference),
                    "canvas": layout_to_dict(s.canvas),
                    "transcript": [turn_to_dict(t) for t in s.transcript],
                }
            jobs = {}
            for jid, j in self._state.jobs.items():
                jobs[jid] = {
                    "session_id": j.session_id,
                    "role": j.role,
                    "turn_index": j.turn_index,
                    "state": j.state,
                    "worker": j.worker,
                    "lease_expires": j.lease_expires,
                    "probe": probe_to_dict(j.probe) if j.probe else None,
                }
            return {
                "sessions": sessions,
                "jobs": jobs,
                "workers": {w: asdict(s) for w, s in self._state.scores.items()},
                "probe_counts": dict(self._state.probe_counts),
                "counters": {
                    "session": self._state.session_counter,
                    "job": self._state.job_counter,
                },
            }

    def snapshot_json(self) -> str:
        return json.dumps(self.state_snapshot(), sort_keys=True)

    def snapshot_to_file(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.snapshot_json())

    def close(self) -> None:
        self._log.close()


def replay_events(events) -> DispatchService:
    """Fold a log back into a service; gaps raise before anything applies."""
    events = check_dense(list(events))
    service = DispatchService(log_events=False)
    for event in events:
        service._log._events.append(event)
        _apply_event(service._state, event)
    return service


def replay_lines(lines) -> DispatchService:
    return replay_events(parse_event_lines(lines))
