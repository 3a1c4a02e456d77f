"""Append-only event log: the single source of truth for dispatch state.

Sequence numbers are dense and start at 1; the log never rewrites.  A file
sink, when configured, receives one JSON line per event as it commits.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

EVENT_KINDS = (
    "session_created",
    "job_opened",
    "job_leased",
    "turn_submitted",
    "turn_validated",
    "turn_rejected",
    "probe_injected",
    "lease_expired",
    "session_completed",
)


class EventLogError(Exception):
    pass


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    payload: dict
    timestamp: float


def event_to_dict(event: Event) -> dict:
    return {
        "seq": event.seq,
        "kind": event.kind,
        "payload": event.payload,
        "timestamp": event.timestamp,
    }


def event_from_dict(data: dict) -> Event:
    return Event(
        seq=data["seq"],
        kind=data["kind"],
        payload=data["payload"],
        timestamp=data["timestamp"],
    )


class EventLog:
    def __init__(self, sink_path: str | None = None):
        self._events: list[Event] = []
        self._sink_path = sink_path
        self._sink = None
        if sink_path:
            os.makedirs(os.path.dirname(sink_path) or ".", exist_ok=True)
            self._sink = open(sink_path, "a", encoding="utf-8")

    @classmethod
    def resume(cls, sink_path: str) -> "EventLog":
        """Reload any events already on disk, then keep appending to the file."""
        log = cls.__new__(cls)
        log._events = []
        log._sink_path = sink_path
        log._sink = None
        if os.path.exists(sink_path):
            with open(sink_path, encoding="utf-8") as fh:
                log._events = parse_event_lines(fh)
        os.makedirs(os.path.dirname(sink_path) or ".", exist_ok=True)
        log._sink = open(sink_path, "a", encoding="utf-8")
        return log

    def append(self, kind: str, payload: dict, timestamp: float) -> Event:
        if kind not in EVENT_KINDS:
            raise EventLogError(f"unknown event kind {kind!r}")
        event = Event(seq=len(self._events) + 1, kind=kind, payload=payload, timestamp=timestamp)
        self._events.append(event)
        if self._sink is not None:
            self._sink.write(json.dumps(event_to_dict(event), sort_keys=True) + "\n")
            self._sink.flush()
        return event

    @property
    def events(self) -> tuple[Event, ...]:
        return tuple(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self):
        return iter(self._events)

    def to_lines(self) -> list[str]:
        return [json.dumps(event_to_dict(e), sort_keys=True) for e in self._events]

    def close(self) -> None:
        if self._sink is not None:
            self._sink.close()
            self._sink = None


def parse_event_lines(lines) -> list[Event]:
    """Decode and check a serialized log; gaps or disorder are rejected."""
    events = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        events.append(event_from_dict(json.loads(line)))
    return check_dense(events)


def check_dense(events) -> list[Event]:
    events = list(events)
    for i, event in enumerate(events):
        if event.seq != i + 1:
            raise EventLogError(f"sequence gap or disorder at seq {event.seq} (expected {i + 1})")
    return events
