"""Turn-based session state machine for the director/designer protocol.

States are immutable values; :func:`append_turn` is a pure transition.
Serializing a given session to whom is the dispatcher's concern, not ours:
the designer-side information hiding happens at the rendering layer.
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from enum import Enum

from .layouts import (
    KIND_SHAPE2D,
    EditOp,
    Layout,
    apply_edit,
    coco_similarity,
    edit_from_dict,
    edit_to_dict,
    exact_match,
    layout_from_dict,
    layout_to_dict,
)


class DialogAct(str, Enum):
    INSTRUCT = "INSTRUCT"
    SUGGEST_FIX = "SUGGEST_FIX"
    ANSWER = "ANSWER"
    QUESTION = "QUESTION"
    EDIT = "EDIT"
    CONFIRM_DONE = "CONFIRM_DONE"
    OTHER = "OTHER"


DIRECTOR = "director"
DESIGNER = "designer"

DIRECTOR_ACTS = frozenset(
    {DialogAct.INSTRUCT, DialogAct.SUGGEST_FIX, DialogAct.ANSWER, DialogAct.CONFIRM_DONE}
)
DESIGNER_ACTS = frozenset({DialogAct.EDIT, DialogAct.QUESTION, DialogAct.OTHER})

AWAITING_DIRECTOR = "awaiting_director"
AWAITING_DESIGNER = "awaiting_designer"
COMPLETED = "completed"
ABANDONED = "abandoned"

HUMAN = "human"
SYNTHETIC = "synthetic"


class ProtocolError(Exception):
    """A turn the protocol refuses; ``code`` is a stable machine-readable label."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Turn:
    index: int
    role: str
    act: DialogAct
    utterance: str
    edits: tuple[EditOp, ...]
    canvas_after: Layout
    author: str
    origin: str = HUMAN
    timestamp: float = 0.0


@dataclass(frozen=True)
class DialogState:
    session_id: str
    scenario: str
    reference: Layout
    canvas: Layout
    transcript: tuple[Turn, ...] = ()
    status: str = AWAITING_DIRECTOR
    round_count: int = 0


def new_session(reference: Layout, session_id: str | None = None) -> DialogState:
    """Fresh session around a hidden reference layout and an empty canvas."""
    return DialogState(
        session_id=session_id or uuid.uuid4().hex[:12],
        scenario=reference.scenario,
        reference=reference,
        canvas=reference.empty_like(),
    )


def legal_acts(state: DialogState) -> set[DialogAct]:
    """Acts the awaited role may submit right now.

    CONFIRM_DONE is structural for shape2d (needs an exact match) but always
    available to coco directors, who judge completion themselves.
    SUGGEST_FIX needs something to correct, ANSWER a pending question.
    """
    if state.status not in (AWAITING_DIRECTOR, AWAITING_DESIGNER):
        raise ProtocolError("session-closed", f"session is {state.status}")
    if state.status == AWAITING_DESIGNER:
        return {DialogAct.EDIT, DialogAct.QUESTION, DialogAct.OTHER}
    acts = {DialogAct.INSTRUCT}
    if any(t.role == DESIGNER for t in state.transcript):
        acts.add(DialogAct.SUGGEST_FIX)
    if state.transcript and state.transcript[-1].act is DialogAct.QUESTION:
        acts.add(DialogAct.ANSWER)
    if state.canvas.kind == KIND_SHAPE2D:
        if exact_match(state.canvas, state.reference):
            acts.add(DialogAct.CONFIRM_DONE)
    else:
        acts.add(DialogAct.CONFIRM_DONE)
    return acts


def _fold_edits(canvas: Layout, edits) -> Layout:
    for edit in edits:
        try:
            canvas, _ = apply_edit(canvas, edit)
        except Exception as exc:
            raise ProtocolError("edit-rejected", str(exc)) from exc
    return canvas


def append_turn(state: DialogState, turn: Turn) -> DialogState:
    """Validate and apply one turn, returning the successor state."""
    awaited = {AWAITING_DIRECTOR: DIRECTOR, AWAITING_DESIGNER: DESIGNER}.get(state.status)
    if awaited is None:
        raise ProtocolError("session-closed", f"session is {state.status}")
    if turn.role != awaited:
        raise ProtocolError("out-of-turn", f"awaiting {awaited}, got {turn.role}")
    if turn.index != len(state.transcript):
        raise ProtocolError(
            "out-of-turn", f"stale turn index {turn.index}, expected {len(state.transcript)}"
        )
    if turn.act not in legal_acts(state):
        raise ProtocolError("protocol-violation", f"{turn.act.value} is not legal here")
    if turn.act is not DialogAct.EDIT and turn.edits:
        raise ProtocolError("protocol-violation", "only EDIT turns carry edits")

    folded = _fold_edits(state.canvas, turn.edits)
    if folded != turn.canvas_after:
        raise ProtocolError("edit-rejected", "canvas_after does not match the folded edits")

    status = AWAITING_DESIGNER if turn.role == DIRECTOR else AWAITING_DIRECTOR
    if turn.act is DialogAct.CONFIRM_DONE:
        status = COMPLETED
    rounds = state.round_count
    if turn.act in (DialogAct.INSTRUCT, DialogAct.SUGGEST_FIX):
        rounds += 1
    return replace(
        state,
        canvas=turn.canvas_after,
        transcript=state.transcript + (turn,),
        status=status,
        round_count=rounds,
    )


@dataclass(frozen=True)
class TerminationCheck:
    status: str
    match_now: bool | float


def check_termination(state: DialogState) -> TerminationCheck:
    """Report completion status plus the live canvas-vs-reference comparison.

    ``match_now`` is a boolean exact match for shape2d and the similarity
    score for coco; a coco session never auto-completes on it.
    """
    if state.canvas.kind == KIND_SHAPE2D:
        match: bool | float = exact_match(state.canvas, state.reference)
    else:
        match = coco_similarity(state.canvas, state.reference)
    return TerminationCheck(status=state.status, match_now=match)


def turn_to_dict(turn: Turn) -> dict:
    """Wire form of one turn; one of these per line is the transcript format."""
    return {
        "index": turn.index,
        "role": turn.role,
        "act": turn.act.value,
        "utterance": turn.utterance,
        "edits": [edit_to_dict(e) for e in turn.edits],
        "canvas_after": layout_to_dict(turn.canvas_after),
        "author": turn.author,
        "origin": turn.origin,
        "timestamp": turn.timestamp,
    }


def turn_from_dict(data: dict) -> Turn:
    canvas = layout_from_dict(data["canvas_after"])
    return Turn(
        index=data["index"],
        role=data["role"],
        act=DialogAct(data["act"]),
        utterance=data["utterance"],
        edits=tuple(edit_from_dict(e, canvas.kind) for e in data["edits"]),
        canvas_after=canvas,
        author=data["author"],
        origin=data.get("origin", HUMAN),
        timestamp=data.get("timestamp", 0.0),
    )


def segment_subdialogs(transcript) -> list[tuple[int, int]]:
    """Split a transcript into half-open [start, stop) sub-dialog ranges.

    Every director INSTRUCT or SUGGEST_FIX opens a segment; all other turns
    attach to the open one.  The ranges partition the transcript.
    """
    segments: list[tuple[int, int]] = []
    start = None
    for i, turn in enumerate(transcript):
        if turn.role == DIRECTOR and turn.act in (DialogAct.INSTRUCT, DialogAct.SUGGEST_FIX):
            if start is not None:
                segments.append((start, i))
            start = i
        elif start is None:
            start = i
    if start is not None:
        segments.append((start, len(transcript)))
    return segments
