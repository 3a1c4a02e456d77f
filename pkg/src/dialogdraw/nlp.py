"""Deterministic lexicon-driven utterance analysis.

The cascade here replaces any statistical NLP: fixed token lexicons,
greedy location grammars, and an ordered rule list for dialog acts.
Coverage is deliberately bounded; the fixture agreement tests measure it.

Surface grid coordinates are 1-indexed ("row 1" is the top row, the way
crowd workers count); internal cells are 0-indexed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .dialog import (
    DESIGNER,
    DIRECTOR,
    AWAITING_DESIGNER,
    AWAITING_DIRECTOR,
    DialogAct,
    DialogState,
    Turn,
    legal_acts,
)
from .layouts import (
    GRID,
    KIND_SHAPE2D,
    EditOp,
    Layout,
    diff_canvases,
)

# ---------------------------------------------------------------------------
# Lexicons.  "box" is a recorded worker synonym for square; nothing else is.

DEFAULT_COLOR_LEXICON = {"blue": "blue", "red": "red", "green": "green"}

DEFAULT_SHAPE_LEXICON = {
    "circle": "circle",
    "circles": "circle",
    "square": "square",
    "squares": "square",
    "triangle": "triangle",
    "triangles": "triangle",
    "box": "square",
    "boxes": "square",
}

REGIONS = (
    "top-left", "top", "top-right",
    "left", "center", "right",
    "bottom-left", "bottom", "bottom-right",
)

_REGION_BIGRAMS = {
    ("top", "left"): "top-left",
    ("upper", "left"): "top-left",
    ("top", "right"): "top-right",
    ("upper", "right"): "top-right",
    ("bottom", "left"): "bottom-left",
    ("lower", "left"): "bottom-left",
    ("bottom", "right"): "bottom-right",
    ("lower", "right"): "bottom-right",
}

_REGION_SINGLES = {
    "top": "top",
    "bottom": "bottom",
    "left": "left",
    "right": "right",
    "middle": "center",
    "center": "center",
    "centre": "center",
}

# relation surface sequences, longest first
_RELATION_SEQS = (
    (("to", "the", "left", "of"), "left_of"),
    (("to", "the", "right", "of"), "right_of"),
    (("left", "of"), "left_of"),
    (("right", "of"), "right_of"),
    (("next", "to"), "next_to"),
    (("beside",), "next_to"),
    (("above",), "above"),
    (("below",), "below"),
    (("under",), "below"),
    (("beneath",), "below"),
)

_WORD_NUMBERS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
    "eleven": 11, "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19, "twenty": 20,
}
_TWENTY_UNITS = {"one": 1, "two": 2, "three": 3, "four": 4, "five": 5}

_WH_AUX = frozenset({"where", "what", "which", "do", "does", "is", "are", "can"})
_ACTION_VERBS = frozenset(
    {"add", "put", "place", "draw", "move", "remove", "delete", "resize", "make", "name"}
)
_FILLERS = frozenset({"please", "ok", "okay", "now", "then", "just"})
_CORRECTION_MARKERS = frozenset({"no", "not", "instead", "actually", "wrong"})
_CONFIRM_MARKERS = frozenset({"done", "finished", "correct"})

# tokens an OTHER response may use to report an impossible instruction
IMPOSSIBILITY_TOKENS = frozenset({"cannot", "cant", "no", "missing", "there", "is", "not"})

_TOKEN_RE = re.compile(r"\d+\.\d+|\d+|[a-z]+|\?")


def load_lexicon(path, defaults: dict[str, str]) -> dict[str, str]:
    """Read `surface<TAB>canonical` lines; a missing file yields the defaults."""
    try:
        with open(path, encoding="utf-8") as fh:
            entries = {}
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                surface, _, canonical = line.partition("\t")
                entries[surface.strip().lower()] = canonical.strip().lower()
            return entries or dict(defaults)
    except (FileNotFoundError, TypeError):
        return dict(defaults)


def normalize(utterance: str) -> list[str]:
    """Lowercased punctuation-split tokens; number words become digits.

    Decimal numbers survive intact, a trailing "?" survives as its own
    token (the act classifier needs it), and n't contractions expand to
    "not" so negation stays visible.
    """
    text = (utterance or "").lower()
    text = text.replace("can't", "cannot").replace("won't", "will not")
    text = re.sub(r"n't\b", " not", text)
    raw = _TOKEN_RE.findall(text)
    tokens: list[str] = []
    i = 0
    while i < len(raw):
        tok = raw[i]
        if tok == "twenty" and i + 1 < len(raw) and raw[i + 1] in _TWENTY_UNITS:
            tokens.append(str(20 + _TWENTY_UNITS[raw[i + 1]]))
            i += 2
            continue
        tokens.append(str(_WORD_NUMBERS[tok]) if tok in _WORD_NUMBERS else tok)
        i += 1
    return tokens


@dataclass(frozen=True)
class ObjectDesc:
    """A partial object description used as a relative-location anchor."""

    color: str | None = None
    shape: str | None = None
    class_label: str | None = None


@dataclass(frozen=True)
class LocationExpr:
    mode: str  # absolute_cell | region | relative
    cell: tuple[int, int] | None = None
    region: str | None = None
    relation: str | None = None
    anchor: ObjectDesc | None = None


@dataclass(frozen=True)
class MentionSet:
    colors: tuple[str, ...] = ()
    shapes: tuple[str, ...] = ()
    classes: tuple[str, ...] = ()
    locations: tuple[LocationExpr, ...] = ()
    counts: tuple[int, ...] = ()

    def is_empty(self) -> bool:
        return not (self.colors or self.shapes or self.classes or self.locations)


def _is_int(tok: str) -> bool:
    return tok.isdigit()


def _grid_coord(tok: str) -> int | None:
    """1-indexed surface coordinate, or None when out of grid range."""
    if _is_int(tok) and 1 <= int(tok) <= GRID:
        return int(tok)
    return None


def _match_cell(tokens: list[str], i: int) -> tuple[tuple[int, int], int] | None:
    """`row R column C` (either order) or a bare `(C, R)` coordinate pair."""
    n = len(tokens)
    if i + 3 < n and tokens[i] == "row" and tokens[i + 2] in ("column", "col"):
        r, c = _grid_coord(tokens[i + 1]), _grid_coord(tokens[i + 3])
        if r and c:
            return (r - 1, c - 1), 4
    if i + 3 < n and tokens[i] in ("column", "col") and tokens[i + 2] == "row":
        c, r = _grid_coord(tokens[i + 1]), _grid_coord(tokens[i + 3])
        if r and c:
            return (r - 1, c - 1), 4
    if (
        i + 1 < n
        and _grid_coord(tokens[i]) is not None
        and _grid_coord(tokens[i + 1]) is not None
        and (i == 0 or tokens[i - 1] not in ("row", "column", "col"))
    ):
        c, r = int(tokens[i]), int(tokens[i + 1])
        return (r - 1, c - 1), 2
    return None


def _match_class(tokens, i, class_entries) -> tuple[str, int] | None:
    """Greedy longest n-gram match against the class lexicon (plural tolerant)."""
    for length in (3, 2, 1):
        if i + length > len(tokens):
            continue
        surface = " ".join(tokens[i : i + length])
        if surface in class_entries:
            return class_entries[surface], length
        if surface.endswith("s") and surface[:-1] in class_entries:
            return class_entries[surface[:-1]], length
    return None


def _consume_anchor(tokens, i, consumed, colors, shapes, class_entries):
    """Eat the object description following a relation word, if any."""
    color = shape = label = None
    j = i
    while j < len(tokens):
        tok = tokens[j]
        if tok in ("the", "a", "an") and (color is None and shape is None and label is None):
            j += 1
            continue
        if tok in colors and color is None:
            color = colors[tok]
            j += 1
            continue
        if tok in shapes and shape is None:
            shape = shapes[tok]
            j += 1
            continue
        cls = _match_class(tokens, j, class_entries)
        if cls and label is None:
            label, length = cls
            j += length
            continue
        break
    if color is None and shape is None and label is None:
        return None, i
    for k in range(i, j):
        consumed[k] = True
    return ObjectDesc(color=color, shape=shape, class_label=label), j


def extract_mentions(
    tokens: list[str],
    kind: str = KIND_SHAPE2D,
    class_lexicon=(),
    shape_lexicon: dict[str, str] | None = None,
    color_lexicon: dict[str, str] | None = None,
) -> MentionSet:
    """Pull colors, shapes, class labels, locations, and counts from tokens.

    Locations parse greedily left to right and consume their tokens (a
    relative expression owns its anchor words, so "left of the green
    triangle" does not also report a green triangle mention).  Unknown
    tokens are ignored.
    """
    shapes_lx = shape_lexicon or DEFAULT_SHAPE_LEXICON
    colors_lx = color_lexicon or DEFAULT_COLOR_LEXICON
    class_entries = {str(c).lower(): str(c).lower() for c in class_lexicon}

    n = len(tokens)
    consumed = [False] * n
    locations: list[LocationExpr] = []

    i = 0
    while i < n:
        if consumed[i]:
            i += 1
            continue
        cell_hit = _match_cell(tokens, i)
        if cell_hit:
            cell, length = cell_hit
            for k in range(i, i + length):
                consumed[k] = True
            locations.append(LocationExpr(mode="absolute_cell", cell=cell))
            i += length
            continue
        rel_hit = None
        for seq, relation in _RELATION_SEQS:
            if tuple(tokens[i : i + len(seq)]) == seq:
                rel_hit = (relation, len(seq))
                break
        if rel_hit:
            relation, length = rel_hit
            for k in range(i, i + length):
                consumed[k] = True
            anchor, j = _consume_anchor(
                tokens, i + length, consumed, colors_lx, shapes_lx, class_entries
            )
            locations.append(LocationExpr(mode="relative", relation=relation, anchor=anchor))
            i = j
            continue
        pair = (tokens[i], tokens[i + 1]) if i + 1 < n else None
        if pair in _REGION_BIGRAMS:
            consumed[i] = consumed[i + 1] = True
            locations.append(LocationExpr(mode="region", region=_REGION_BIGRAMS[pair]))
            i += 2
            continue
        if tokens[i] in _REGION_SINGLES:
            consumed[i] = True
            locations.append(LocationExpr(mode="region", region=_REGION_SINGLES[tokens[i]]))
            i += 1
            continue
        i += 1

    colors: list[str] = []
    shapes: list[str] = []
    classes: list[str] = []
    counts: list[int] = []
    i = 0
    while i < n:
        if consumed[i]:
            i += 1
            continue
        tok = tokens[i]
        if tok in colors_lx:
            colors.append(colors_lx[tok])
        elif tok in shapes_lx:
            shapes.append(shapes_lx[tok])
        elif _is_int(tok):
            counts.append(int(tok))
        else:
            cls = _match_class(tokens, i, class_entries)
            if cls:
                classes.append(cls[0])
                i += cls[1]
                continue
        i += 1

    return MentionSet(
        colors=tuple(colors),
        shapes=tuple(shapes),
        classes=tuple(classes),
        locations=tuple(locations),
        counts=tuple(counts),
    )


def _head_token(tokens: list[str]) -> str | None:
    for tok in tokens:
        if tok not in _FILLERS:
            return tok
    return None


def _contains_subsequence(tokens, seq) -> bool:
    for i in range(len(tokens) - len(seq) + 1):
        if tuple(tokens[i : i + len(seq)]) == seq:
            return True
    return False


def classify_dialog_act(tokens: list[str], role: str) -> DialogAct:
    """Ordered rule cascade; always returns an act legal for the role.

    Question shape wins first (trailing "?" or a leading wh/aux word), then
    an action-verb head, then director correction markers, then director
    confirmation markers.  Anything else is OTHER for designers and a plain
    INSTRUCT for directors.
    """
    question_shaped = bool(tokens) and (tokens[-1] == "?" or tokens[0] in _WH_AUX)
    head = _head_token(tokens)
    if role == DESIGNER:
        if question_shaped:
            return DialogAct.QUESTION
        if head in _ACTION_VERBS:
            return DialogAct.EDIT
        return DialogAct.OTHER
    if question_shaped:
        return DialogAct.INSTRUCT  # question-shaped prompts still direct the designer
    if head in _ACTION_VERBS:
        return DialogAct.INSTRUCT
    if any(t in _CORRECTION_MARKERS for t in tokens):
        return DialogAct.SUGGEST_FIX
    if (
        any(t in _CONFIRM_MARKERS for t in tokens)
        or _contains_subsequence(tokens, ("that", "s", "it"))
        or _contains_subsequence(tokens, ("that", "is", "it"))
    ):
        return DialogAct.CONFIRM_DONE
    return DialogAct.INSTRUCT


def probe_pass(act: DialogAct, tokens: list[str]) -> bool:
    """Whether a designer response to a non-viable instruction counts as a pass.

    Asking is the tested behavior; an OTHER turn that plainly reports the
    impossibility counts too.  Executing an edit anyway is the failure mode.
    """
    if act is DialogAct.QUESTION:
        return True
    if act is DialogAct.OTHER:
        return any(t in IMPOSSIBILITY_TOKENS for t in tokens)
    return False


ACCEPTED = "accepted"
REJECTED = "rejected"
FLAGGED = "flagged"


@dataclass(frozen=True)
class ValidationResult:
    verdict: str
    derived_edits: tuple[EditOp, ...] = ()
    derived_act: DialogAct | None = None
    notes: tuple[str, ...] = ()


def _edit_attributes(edits, prev: Layout) -> set:
    """Attribute vocabulary touched by an edit list, for overlap checks."""
    attrs: set = set()
    cells = prev.cell_map() if prev.kind == KIND_SHAPE2D else {}
    ids = prev.by_id() if prev.kind != KIND_SHAPE2D else {}
    for e in edits:
        if e.obj is not None:
            if prev.kind == KIND_SHAPE2D:
                attrs.update({e.obj.color, e.obj.shape, e.obj.cell})
            else:
                attrs.add(e.obj.class_label)
        if e.cell is not None:
            attrs.add(e.cell)
            target = cells.get(e.cell)
            if target is not None:
                attrs.update({target.color, target.shape})
        if e.dest is not None:
            attrs.add(e.dest)
        if e.target_id is not None and e.target_id in ids:
            attrs.add(ids[e.target_id].class_label)
    return attrs


def _mention_attributes(mentions: MentionSet) -> set:
    attrs: set = set(mentions.colors) | set(mentions.shapes) | set(mentions.classes)
    for loc in mentions.locations:
        if loc.mode == "absolute_cell":
            attrs.add(loc.cell)
        if loc.anchor is not None:
            attrs.update(v for v in (loc.anchor.color, loc.anchor.shape, loc.anchor.class_label) if v)
    return attrs


def validate_submission(
    state: DialogState,
    proposed: Turn,
    probe=None,
    class_lexicon=(),
) -> ValidationResult:
    """Screen a proposed turn before it reaches the protocol.

    Structural problems reject; semantic oddities (failed probe response,
    an edit sharing no attribute with the instruction it follows) only
    flag, since humans may act creatively.  An accepted result is always
    appendable.
    """
    notes: list[str] = []
    awaited = {AWAITING_DIRECTOR: DIRECTOR, AWAITING_DESIGNER: DESIGNER}.get(state.status)
    if awaited is None:
        return ValidationResult(REJECTED, notes=(f"session is {state.status}",))
    if proposed.role != awaited:
        return ValidationResult(REJECTED, notes=("out-of-turn",))
    if proposed.index != len(state.transcript):
        return ValidationResult(REJECTED, notes=("stale-turn-index",))

    tokens = normalize(proposed.utterance)
    try:
        derived_edits = tuple(diff_canvases(state.canvas, proposed.canvas_after))
    except ValueError as exc:
        return ValidationResult(REJECTED, notes=(f"edit-rejected: {exc}",))

    if derived_edits and not proposed.utterance and proposed.role == DESIGNER:
        derived_act = DialogAct.EDIT
    else:
        derived_act = classify_dialog_act(tokens, proposed.role)

    if proposed.act not in legal_acts(state):
        return ValidationResult(
            REJECTED, derived_edits, derived_act, (f"protocol-violation: {proposed.act.value}",)
        )
    if derived_edits and (proposed.role != DESIGNER or proposed.act is not DialogAct.EDIT):
        return ValidationResult(
            REJECTED, derived_edits, derived_act, ("canvas-changed-outside-edit-turn",)
        )

    verdict = ACCEPTED
    if probe is not None and proposed.role == DESIGNER:
        if not probe_pass(proposed.act, tokens):
            verdict = FLAGGED
            notes.append("probe-failed")
    if proposed.role == DESIGNER and proposed.act is DialogAct.EDIT and derived_edits:
        last_director = next(
            (t for t in reversed(state.transcript) if t.role == DIRECTOR), None
        )
        instruction = probe.utterance if probe is not None else (
            last_director.utterance if last_director else ""
        )
        mentions = extract_mentions(normalize(instruction), state.canvas.kind, class_lexicon)
        if not mentions.is_empty():
            overlap = _mention_attributes(mentions) & _edit_attributes(derived_edits, state.canvas)
            if not overlap:
                verdict = FLAGGED
                notes.append("zero-attribute-overlap")

    return ValidationResult(verdict, derived_edits, derived_act, tuple(notes))
