"""Utterance analysis: tokenization, extraction, act classification, validation."""
import json
import os

from dialogdraw.dialog import (
    DESIGNER,
    DIRECTOR,
    DialogAct,
    Turn,
    append_turn,
    new_session,
)
from dialogdraw.layouts import COLORS, SHAPES, EditOp, ShapeObject, apply_edits
from dialogdraw.nlp import (
    ACCEPTED,
    FLAGGED,
    REJECTED,
    DEFAULT_SHAPE_LEXICON,
    classify_dialog_act,
    extract_mentions,
    load_lexicon,
    normalize,
    probe_pass,
    validate_submission,
)
from dialogdraw.agents import Probe
from fixtures import shape_layout

DATA = os.path.join(os.path.dirname(__file__), "data")


# ---------------------------------------------------------------------------
# normalize

def test_normalize_basic():
    assert normalize("Add a RED circle.") == ["add", "a", "red", "circle"]
    assert normalize("row 2, column 3") == ["row", "2", "column", "3"]
    assert normalize("put two blue squares") == ["put", "2", "blue", "squares"]


def test_normalize_number_words():
    assert normalize("twenty five") == ["25"]
    assert normalize("twenty-one") == ["21"]
    assert normalize("zero one twenty") == ["0", "1", "20"]


def test_normalize_keeps_question_mark_and_decimals():
    assert normalize("where to put circle?") == ["where", "to", "put", "circle", "?"]
    assert normalize("x 0.62 y 0.41") == ["x", "0.62", "y", "0.41"]


def test_normalize_expands_contractions():
    assert normalize("can't do that") == ["cannot", "do", "that"]
    assert normalize("don't") == ["do", "not"]


def test_normalize_deterministic():
    text = "Move THE box; left of (2, 3)?"
    assert normalize(text) == normalize(text)


# ---------------------------------------------------------------------------
# extract_mentions

def test_extract_add_instruction():
    mentions = extract_mentions(["add", "a", "red", "circle", "at", "row", "1", "column", "1"])
    assert mentions.colors == ("red",)
    assert mentions.shapes == ("circle",)
    assert [loc.cell for loc in mentions.locations] == [(0, 0)]
    assert mentions.counts == ()


def test_extract_box_synonym_and_relative_anchor():
    mentions = extract_mentions(["move", "the", "box", "left", "of", "the", "green", "triangle"])
    assert mentions.shapes == ("square",)
    assert len(mentions.locations) == 1
    loc = mentions.locations[0]
    assert loc.mode == "relative" and loc.relation == "left_of"
    assert loc.anchor.color == "green" and loc.anchor.shape == "triangle"
    # anchor words are consumed, not re-reported as top-level mentions
    assert mentions.colors == ()


def test_extract_regions():
    mentions = extract_mentions(normalize("put it in the top left"))
    assert mentions.locations[0].mode == "region"
    assert mentions.locations[0].region == "top-left"
    mentions = extract_mentions(normalize("somewhere in the middle"))
    assert mentions.locations[0].region == "center"


def test_extract_coordinate_pair():
    mentions = extract_mentions(normalize("put the circle at (2, 3)"))
    assert [loc.cell for loc in mentions.locations] == [(2, 1)]  # (col, row) surface order


def test_extract_column_row_order():
    mentions = extract_mentions(normalize("column 4 row 2"))
    assert [loc.cell for loc in mentions.locations] == [(1, 3)]


def test_extract_counts_and_plurals():
    mentions = extract_mentions(normalize("add two green circles"))
    assert mentions.counts == (2,)
    assert mentions.shapes == ("circle",)
    assert mentions.colors == ("green",)


def test_extract_classes_multiword():
    mentions = extract_mentions(
        normalize("move the traffic light above the fire hydrant"),
        kind="coco",
        class_lexicon=("traffic light", "fire hydrant", "dog"),
    )
    assert mentions.classes == ("traffic light",)
    rel = mentions.locations[0]
    assert rel.relation == "above" and rel.anchor.class_label == "fire hydrant"


def test_extract_out_of_range_rows_not_cells():
    mentions = extract_mentions(normalize("row 9 column 9"))
    assert mentions.locations == ()
    assert mentions.counts == (9, 9)


def test_empty_mentions_for_chitchat():
    mentions = extract_mentions(normalize("thanks, looks good"))
    assert mentions.is_empty()


# ---------------------------------------------------------------------------
# classify_dialog_act

def test_classify_spec_examples():
    assert classify_dialog_act(normalize("where to put circle?"), DESIGNER) is DialogAct.QUESTION
    assert classify_dialog_act(
        normalize("place a blue square at row 3 column 4"), DIRECTOR
    ) is DialogAct.INSTRUCT


def test_classify_role_legality_everywhere():
    utterances = [
        "", "?", "add", "no", "done", "where is it?", "that's it",
        "move the box", "i think so", "wrong one",
    ]
    director_ok = {DialogAct.INSTRUCT, DialogAct.SUGGEST_FIX, DialogAct.ANSWER,
                   DialogAct.CONFIRM_DONE}
    designer_ok = {DialogAct.EDIT, DialogAct.QUESTION, DialogAct.OTHER}
    for utt in utterances:
        assert classify_dialog_act(normalize(utt), DIRECTOR) in director_ok
        assert classify_dialog_act(normalize(utt), DESIGNER) in designer_ok


def test_classify_fixture_agreement_at_least_90_percent():
    with open(os.path.join(DATA, "dialog_acts_fixture.json"), encoding="utf-8") as fh:
        items = json.load(fh)["items"]
    assert len(items) == 60
    hits = sum(
        classify_dialog_act(normalize(item["utterance"]), item["role"]).value == item["act"]
        for item in items
    )
    assert hits / len(items) >= 0.90


def test_probe_pass_rules():
    assert probe_pass(DialogAct.QUESTION, normalize("where is the blue triangle?"))
    assert probe_pass(DialogAct.OTHER, normalize("there is no blue triangle"))
    assert not probe_pass(DialogAct.OTHER, normalize("sure thing boss"))
    assert not probe_pass(DialogAct.EDIT, [])


# ---------------------------------------------------------------------------
# lexicon loading

def test_load_lexicon_missing_file_gives_defaults(tmp_path):
    assert load_lexicon(tmp_path / "absent.tsv", DEFAULT_SHAPE_LEXICON) == DEFAULT_SHAPE_LEXICON


def test_load_lexicon_file(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("Rect\tsquare\nrects\tsquare\n# comment\n")
    assert load_lexicon(path, {}) == {"rect": "square", "rects": "square"}


# ---------------------------------------------------------------------------
# validate_submission

def instructed_state(utterance="add a red circle at row 1 column 1"):
    ref = shape_layout([("red", "circle", 0, 0), ("green", "square", 4, 4)])
    state = new_session(ref)
    turn = Turn(index=0, role=DIRECTOR, act=DialogAct.INSTRUCT, utterance=utterance,
                edits=(), canvas_after=state.canvas, author="d1")
    return append_turn(state, turn)


def designer_submission(state, edits, act=DialogAct.EDIT, utterance=""):
    return Turn(
        index=len(state.transcript), role=DESIGNER, act=act, utterance=utterance,
        edits=(), canvas_after=apply_edits(state.canvas, edits), author="w1",
    )


def test_validate_accepts_matching_edit():
    state = instructed_state()
    edit = EditOp(op="add", obj=ShapeObject("circle", "red", 0, 0))
    result = validate_submission(state, designer_submission(state, [edit]))
    assert result.verdict == ACCEPTED
    assert [e.op for e in result.derived_edits] == ["add"]
    assert result.derived_act is DialogAct.EDIT


def test_validate_flags_zero_attribute_overlap():
    state = instructed_state("add a red circle at row 1 column 1")
    # designer instead adds an unrelated object: nothing overlaps the mentions
    edit = EditOp(op="add", obj=ShapeObject("triangle", "blue", 3, 3))
    result = validate_submission(state, designer_submission(state, [edit]))
    assert result.verdict == FLAGGED
    assert "zero-attribute-overlap" in result.notes


def test_validate_accepts_overlapping_edit_without_flag():
    state = instructed_state("add a red circle at row 1 column 1")
    edit = EditOp(op="add", obj=ShapeObject("circle", "blue", 3, 3))  # shares the shape
    result = validate_submission(state, designer_submission(state, [edit]))
    assert result.verdict == ACCEPTED


def test_validate_flags_probe_answered_with_edit():
    state = instructed_state()
    probe = Probe(id="p1", kind="nonviable_target",
                  utterance="move the blue triangle to row 2 column 2", injected_at=1)
    edit = EditOp(op="add", obj=ShapeObject("triangle", "blue", 1, 1))
    result = validate_submission(state, designer_submission(state, [edit]), probe=probe)
    assert result.verdict == FLAGGED
    assert "probe-failed" in result.notes


def test_validate_passes_probe_answered_with_question():
    state = instructed_state()
    probe = Probe(id="p1", kind="nonviable_target",
                  utterance="move the blue triangle to row 2 column 2", injected_at=1)
    turn = designer_submission(state, [], act=DialogAct.QUESTION,
                               utterance="where is the blue triangle?")
    result = validate_submission(state, turn, probe=probe)
    assert result.verdict == ACCEPTED


def test_validate_rejects_wrong_role_and_stale_index():
    state = instructed_state()
    wrong_role = Turn(index=1, role=DIRECTOR, act=DialogAct.INSTRUCT, utterance="x",
                      edits=(), canvas_after=state.canvas, author="d1")
    assert validate_submission(state, wrong_role).verdict == REJECTED
    stale = designer_submission(state, [])
    stale = Turn(**{**stale.__dict__, "index": 5})
    assert validate_submission(state, stale).verdict == REJECTED
    assert validate_submission(state, stale).notes


def test_validate_rejects_canvas_change_on_question_turn():
    state = instructed_state()
    edit = EditOp(op="add", obj=ShapeObject("circle", "red", 0, 0))
    sneaky = designer_submission(state, [edit], act=DialogAct.QUESTION, utterance="hm?")
    result = validate_submission(state, sneaky)
    assert result.verdict == REJECTED


def test_validate_rejects_illegal_act():
    state = instructed_state()
    # CONFIRM_DONE is a director act; also illegal while awaiting the designer
    bad = Turn(index=1, role=DESIGNER, act=DialogAct.CONFIRM_DONE, utterance="done",
               edits=(), canvas_after=state.canvas, author="w1")
    result = validate_submission(state, bad)
    assert result.verdict == REJECTED


def test_validate_never_accepts_what_append_rejects():
    import random
    from dataclasses import replace as dc_replace

    rng = random.Random(5)
    state = instructed_state()
    acts = list(DialogAct)
    for _ in range(200):
        edits = []
        if rng.random() < 0.5:
            edits = [EditOp(op="add", obj=ShapeObject(
                rng.choice(SHAPES), rng.choice(COLORS),
                rng.randrange(5), rng.randrange(5)))]
        turn = designer_submission(state, edits, act=rng.choice(acts),
                                   utterance=rng.choice(["", "ok?", "done", "move it"]))
        turn = dc_replace(turn, edits=tuple(edits))
        result = validate_submission(state, turn)
        if result.verdict in (ACCEPTED, FLAGGED):
            append_turn(state, turn)  # must not raise
