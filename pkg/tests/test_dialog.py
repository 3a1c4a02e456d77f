"""Session state machine: legality, transitions, termination, segmentation."""
import random

import pytest

from dialogdraw.dialog import (
    AWAITING_DESIGNER,
    AWAITING_DIRECTOR,
    COMPLETED,
    DESIGNER,
    DIRECTOR,
    DialogAct,
    ProtocolError,
    Turn,
    append_turn,
    check_termination,
    legal_acts,
    new_session,
    segment_subdialogs,
    turn_from_dict,
    turn_to_dict,
)
from dialogdraw.layouts import EditOp, ShapeObject, apply_edits, exact_match
from dialogdraw.layouts import generate_random_shape_layout
from fixtures import coco_layout, shape_layout


def director_turn(state, act, utterance="", canvas=None):
    return Turn(
        index=len(state.transcript), role=DIRECTOR, act=act, utterance=utterance,
        edits=(), canvas_after=canvas if canvas is not None else state.canvas,
        author="d1",
    )


def designer_edit(state, edits):
    canvas = apply_edits(state.canvas, edits)
    return Turn(
        index=len(state.transcript), role=DESIGNER, act=DialogAct.EDIT, utterance="",
        edits=tuple(edits), canvas_after=canvas, author="w1",
    )


def designer_turn(state, act, utterance):
    return Turn(
        index=len(state.transcript), role=DESIGNER, act=act, utterance=utterance,
        edits=(), canvas_after=state.canvas, author="w1",
    )


def add(color, shape, row, col):
    return EditOp(op="add", obj=ShapeObject(shape=shape, color=color, row=row, col=col))


# ---------------------------------------------------------------------------
# new_session

def test_new_session_shape2d():
    ref = shape_layout([("red", "circle", 0, 0)])
    state = new_session(ref)
    assert state.status == AWAITING_DIRECTOR
    assert state.canvas.objects == ()
    assert state.canvas.kind == "shape2d"
    assert state.transcript == ()


def test_new_session_coco():
    state = new_session(coco_layout([(1, "dog", 0.1, 0.1, 0.2, 0.2)]))
    assert state.canvas.kind == "coco" and state.canvas.objects == ()


def test_new_session_pure_modulo_id():
    ref = generate_random_shape_layout(5)
    a, b = new_session(ref, "x"), new_session(ref, "y")
    assert a.canvas == b.canvas and a.reference == b.reference and a.status == b.status


# ---------------------------------------------------------------------------
# legal_acts

def test_fresh_shape2d_session_allows_only_instruct():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    assert legal_acts(state) == {DialogAct.INSTRUCT}


def test_fresh_coco_session_allows_confirm():
    state = new_session(coco_layout([(1, "dog", 0.1, 0.1, 0.2, 0.2)]))
    assert legal_acts(state) == {DialogAct.INSTRUCT, DialogAct.CONFIRM_DONE}


def test_answer_legal_only_after_question():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "add a red circle"))
    state = append_turn(state, designer_turn(state, DialogAct.OTHER, "ok"))
    assert DialogAct.ANSWER not in legal_acts(state)
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "go on"))
    state = append_turn(state, designer_turn(state, DialogAct.QUESTION, "where?"))
    acts = legal_acts(state)
    assert DialogAct.ANSWER in acts
    assert DialogAct.SUGGEST_FIX in acts


def test_suggest_fix_needs_prior_designer_turn():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    assert DialogAct.SUGGEST_FIX not in legal_acts(state)


def test_confirm_done_gated_on_exact_match():
    ref = shape_layout([("red", "circle", 0, 0)])
    state = new_session(ref)
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "add it"))
    assert DialogAct.CONFIRM_DONE not in legal_acts(
        append_turn(state, designer_turn(state, DialogAct.OTHER, "hmm"))
    )
    state = append_turn(state, designer_edit(state, [add("red", "circle", 0, 0)]))
    assert DialogAct.CONFIRM_DONE in legal_acts(state)


def test_legal_acts_rejects_closed_session():
    ref = shape_layout([])
    state = new_session(ref)
    state = append_turn(state, director_turn(state, DialogAct.CONFIRM_DONE, "done"))
    with pytest.raises(ProtocolError) as err:
        legal_acts(state)
    assert err.value.code == "session-closed"


# ---------------------------------------------------------------------------
# append_turn

def test_instruct_then_edit_round():
    ref = shape_layout([("red", "circle", 0, 0)])
    state = new_session(ref)
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "add a red circle at row 1 column 1"))
    assert state.status == AWAITING_DESIGNER
    state = append_turn(state, designer_edit(state, [add("red", "circle", 0, 0)]))
    assert state.status == AWAITING_DIRECTOR
    assert exact_match(state.canvas, ref)
    assert state.round_count == 1


def test_out_of_turn_rejected():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "go"))
    state = append_turn(state, designer_turn(state, DialogAct.OTHER, "ok"))
    turn = designer_turn(state, DialogAct.OTHER, "again")
    with pytest.raises(ProtocolError) as err:
        append_turn(state, turn)
    assert err.value.code == "out-of-turn"


def test_stale_index_rejected():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    turn = director_turn(state, DialogAct.INSTRUCT, "go")
    state = append_turn(state, turn)
    state = append_turn(state, designer_turn(state, DialogAct.OTHER, "ok"))
    with pytest.raises(ProtocolError):
        append_turn(state, turn)  # index 0 again


def test_illegal_act_rejected():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    with pytest.raises(ProtocolError) as err:
        append_turn(state, director_turn(state, DialogAct.SUGGEST_FIX, "no, wrong"))
    assert err.value.code == "protocol-violation"


def test_edits_on_non_edit_turn_rejected():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "go"))
    bad = Turn(
        index=1, role=DESIGNER, act=DialogAct.QUESTION, utterance="where?",
        edits=(add("red", "circle", 0, 0),),
        canvas_after=apply_edits(state.canvas, [add("red", "circle", 0, 0)]),
        author="w1",
    )
    with pytest.raises(ProtocolError):
        append_turn(state, bad)


def test_inconsistent_canvas_after_rejected():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "go"))
    bad = Turn(
        index=1, role=DESIGNER, act=DialogAct.EDIT, utterance="",
        edits=(add("red", "circle", 0, 0),),
        canvas_after=state.canvas,  # does not include the edit
        author="w1",
    )
    with pytest.raises(ProtocolError) as err:
        append_turn(state, bad)
    assert err.value.code == "edit-rejected"


def test_scripted_six_turn_round_count():
    ref = shape_layout([
        ("red", "circle", 0, 0), ("blue", "square", 1, 1), ("green", "triangle", 2, 2),
    ])
    state = new_session(ref)
    script = [
        (DialogAct.INSTRUCT, [add("red", "circle", 0, 0)]),
        (DialogAct.INSTRUCT, [add("blue", "square", 1, 1)]),
        (DialogAct.INSTRUCT, [add("green", "triangle", 2, 2)]),
    ]
    for act, edits in script:
        state = append_turn(state, director_turn(state, act, "next"))
        state = append_turn(state, designer_edit(state, edits))
    assert len(state.transcript) == 6
    assert state.round_count == 3  # hand count: three INSTRUCT turns


def test_append_turn_is_pure():
    state = new_session(shape_layout([("red", "circle", 0, 0)]))
    turn = director_turn(state, DialogAct.INSTRUCT, "go")
    assert append_turn(state, turn) == append_turn(state, turn)
    assert state.transcript == ()


def test_role_alternation_over_random_valid_scripts():
    rng = random.Random(13)
    for _ in range(30):
        ref = generate_random_shape_layout(rng.randrange(1000))
        state = new_session(ref)
        for _ in range(rng.randrange(2, 8)):
            if state.status == AWAITING_DIRECTOR:
                state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "go"))
            else:
                state = append_turn(state, designer_turn(state, DialogAct.OTHER, "ok"))
        roles = [t.role for t in state.transcript]
        assert all(roles[i] != roles[i + 1] for i in range(len(roles) - 1))


# ---------------------------------------------------------------------------
# termination

def test_match_without_confirm_keeps_session_open():
    ref = shape_layout([("red", "circle", 0, 0)])
    state = new_session(ref)
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "add it"))
    state = append_turn(state, designer_edit(state, [add("red", "circle", 0, 0)]))
    report = check_termination(state)
    assert report.status == AWAITING_DIRECTOR
    assert report.match_now is True


def test_confirm_done_completes():
    ref = shape_layout([])
    state = new_session(ref)
    state = append_turn(state, director_turn(state, DialogAct.CONFIRM_DONE, "done"))
    assert state.status == COMPLETED
    assert check_termination(state).status == COMPLETED


def test_completed_shape2d_session_matches_at_confirm():
    ref = shape_layout([("green", "triangle", 4, 4)])
    state = new_session(ref)
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "add it"))
    state = append_turn(state, designer_edit(state, [add("green", "triangle", 4, 4)]))
    state = append_turn(state, director_turn(state, DialogAct.CONFIRM_DONE, "done"))
    assert state.status == COMPLETED
    assert exact_match(state.canvas, state.reference)


def test_coco_match_now_carries_similarity():
    ref = coco_layout([(1, "dog", 0.1, 0.1, 0.2, 0.2)])
    state = new_session(ref)
    report = check_termination(state)
    assert report.match_now == 0.0
    assert state.status == AWAITING_DIRECTOR  # similarity never auto-completes


# ---------------------------------------------------------------------------
# segmentation

def build_transcript(ref, acts):
    """acts: list of (role, act, edits) driven through append_turn."""
    state = new_session(ref)
    for role, act, edits in acts:
        if role == DIRECTOR:
            state = append_turn(state, director_turn(state, act, "text"))
        elif act is DialogAct.EDIT:
            state = append_turn(state, designer_edit(state, edits))
        else:
            state = append_turn(state, designer_turn(state, act, "text?"))
    return state


def test_three_instructions_three_segments():
    ref = shape_layout([
        ("red", "circle", 0, 0), ("blue", "square", 1, 1), ("green", "triangle", 2, 2),
    ])
    state = build_transcript(ref, [
        (DIRECTOR, DialogAct.INSTRUCT, None),
        (DESIGNER, DialogAct.EDIT, [add("red", "circle", 0, 0)]),
        (DIRECTOR, DialogAct.INSTRUCT, None),
        (DESIGNER, DialogAct.EDIT, [add("blue", "square", 1, 1)]),
        (DIRECTOR, DialogAct.INSTRUCT, None),
        (DESIGNER, DialogAct.EDIT, [add("green", "triangle", 2, 2)]),
    ])
    assert segment_subdialogs(state.transcript) == [(0, 2), (2, 4), (4, 6)]


def test_question_answer_attaches_to_segment():
    ref = shape_layout([("red", "circle", 0, 0)])
    state = build_transcript(ref, [
        (DIRECTOR, DialogAct.INSTRUCT, None),
        (DESIGNER, DialogAct.QUESTION, None),
        (DIRECTOR, DialogAct.ANSWER, None),
        (DESIGNER, DialogAct.EDIT, [add("red", "circle", 0, 0)]),
    ])
    assert segment_subdialogs(state.transcript) == [(0, 4)]


def test_twenty_turn_fixture_segmentation():
    ref = shape_layout([
        ("red", "circle", 0, 0), ("blue", "square", 1, 1), ("green", "triangle", 2, 2),
        ("red", "square", 3, 3), ("blue", "circle", 4, 4),
    ])
    script = [
        (DIRECTOR, DialogAct.INSTRUCT, None),                      # 0 segment A
        (DESIGNER, DialogAct.QUESTION, None),                      # 1
        (DIRECTOR, DialogAct.ANSWER, None),                        # 2
        (DESIGNER, DialogAct.EDIT, [add("red", "circle", 0, 0)]),  # 3
        (DIRECTOR, DialogAct.INSTRUCT, None),                      # 4 segment B
        (DESIGNER, DialogAct.EDIT, [add("blue", "square", 1, 1)]), # 5
        (DIRECTOR, DialogAct.INSTRUCT, None),                      # 6 segment C
        (DESIGNER, DialogAct.OTHER, None),                         # 7
        (DIRECTOR, DialogAct.SUGGEST_FIX, None),                   # 8 segment D
        (DESIGNER, DialogAct.EDIT, [add("green", "triangle", 2, 2)]),  # 9
        (DIRECTOR, DialogAct.INSTRUCT, None),                      # 10 segment E
        (DESIGNER, DialogAct.QUESTION, None),                      # 11
        (DIRECTOR, DialogAct.ANSWER, None),                        # 12
        (DESIGNER, DialogAct.QUESTION, None),                      # 13
        (DIRECTOR, DialogAct.ANSWER, None),                        # 14
        (DESIGNER, DialogAct.EDIT, [add("red", "square", 3, 3)]),  # 15
        (DIRECTOR, DialogAct.INSTRUCT, None),                      # 16 segment F
        (DESIGNER, DialogAct.EDIT, [add("blue", "circle", 4, 4)]), # 17
        (DIRECTOR, DialogAct.CONFIRM_DONE, None),                  # 18 attaches to F
    ]
    state = build_transcript(ref, script)
    # hand annotation of the script above
    assert segment_subdialogs(state.transcript) == [
        (0, 4), (4, 6), (6, 8), (8, 10), (10, 16), (16, 19),
    ]


def test_segments_partition_any_transcript():
    rng = random.Random(21)
    for _ in range(30):
        ref = generate_random_shape_layout(rng.randrange(500))
        state = new_session(ref)
        for _ in range(rng.randrange(1, 12)):
            if state.status == AWAITING_DIRECTOR:
                act = rng.choice([DialogAct.INSTRUCT, DialogAct.INSTRUCT, DialogAct.SUGGEST_FIX])
                if act is DialogAct.SUGGEST_FIX and not any(
                    t.role == DESIGNER for t in state.transcript
                ):
                    act = DialogAct.INSTRUCT
                state = append_turn(state, director_turn(state, act, "go"))
            else:
                state = append_turn(state, designer_turn(
                    state, rng.choice([DialogAct.QUESTION, DialogAct.OTHER]), "?"))
        segments = segment_subdialogs(state.transcript)
        covered = [i for start, stop in segments for i in range(start, stop)]
        assert covered == list(range(len(state.transcript)))


# ---------------------------------------------------------------------------
# serialization

def test_turn_round_trips_through_dict():
    ref = shape_layout([("red", "circle", 0, 0)])
    state = new_session(ref)
    state = append_turn(state, director_turn(state, DialogAct.INSTRUCT, "add a red circle"))
    turn = designer_edit(state, [add("red", "circle", 0, 0)])
    assert turn_from_dict(turn_to_dict(turn)) == turn
