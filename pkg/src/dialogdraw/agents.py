"""Synthetic agents: template director, probe injection, and a rule designer.

The director template names exactly one difference per instruction, which
keeps self-play progress provable and mirrors how crowd workers mostly
behave.  Probes are instructions with no valid execution, built so the
optimal response (a clarifying question) is known in advance and can score
the responder.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .dialog import (
    DESIGNER,
    DIRECTOR,
    SYNTHETIC,
    DialogAct,
    DialogState,
    Turn,
    check_termination,
    legal_acts,
)
from .layouts import (
    COLORS,
    KIND_SHAPE2D,
    SHAPES,
    CocoObject,
    EditOp,
    Layout,
    ShapeObject,
    apply_edits,
    diff_canvases,
    exact_match,
)
from .nlp import MentionSet, extract_mentions, normalize, probe_pass

PROBE_KINDS = ("nonviable_target", "ambiguous_location", "contradictory_attributes")

REGION_NAMES = (
    "top left", "top", "top right", "left", "center", "right",
    "bottom left", "bottom", "bottom right",
)

_ADD_VERBS = frozenset({"add", "put", "place", "draw"})
_REMOVE_VERBS = frozenset({"remove", "delete"})
_MOVE_VERBS = frozenset({"move", "relocate"})
_RESIZE_VERBS = frozenset({"resize"})

DEFAULT_TEMPLATES = {
    "add": "add a {color} {shape} at row {row} column {col}",
    "remove": "remove the {color} {shape} at row {row} column {col}",
    "move": (
        "move the {color} {shape} from row {row} column {col}"
        " to row {to_row} column {to_col}"
    ),
    "coco_add": "add a {class} at the {region}, at {box}",
    "coco_remove": "remove the {class} at the {region}, at {box}",
    "coco_fix": "{verb} the {class} at {box} to {to_box}",
}


def load_templates(path) -> dict[str, str]:
    """Read a `key<TAB>template` catalog; a missing file yields the defaults.

    Missing keys keep their built-in wording, so a catalog may override
    just one form.
    """
    templates = dict(DEFAULT_TEMPLATES)
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                key, _, template = line.partition("\t")
                if template:
                    templates[key.strip()] = template
    except (FileNotFoundError, TypeError):
        pass
    return templates


class ProbeUnavailable(Exception):
    """The requested probe kind cannot be built on this canvas."""


class NothingToInstruct(Exception):
    """Canvas already matches the reference; there is no difference to name."""


@dataclass(frozen=True)
class Probe:
    id: str
    kind: str
    utterance: str
    injected_at: int = 0
    gold_act: DialogAct = DialogAct.QUESTION


@dataclass
class WorkerScore:
    worker_id: str
    probes_seen: int = 0
    probes_passed: int = 0
    tasks_contributed: int = 0
    flags: int = 0


def probe_to_dict(probe: Probe) -> dict:
    return {
        "id": probe.id,
        "kind": probe.kind,
        "utterance": probe.utterance,
        "injected_at": probe.injected_at,
        "gold_act": probe.gold_act.value,
    }


def probe_from_dict(data: dict) -> Probe:
    return Probe(
        id=data["id"],
        kind=data["kind"],
        utterance=data["utterance"],
        injected_at=data["injected_at"],
        gold_act=DialogAct(data["gold_act"]),
    )


# ---------------------------------------------------------------------------
# Region vocabulary for box positions (3x3 split of the unit canvas).

def region_of_point(x: float, y: float) -> str:
    col = 0 if x < 1 / 3 else (1 if x < 2 / 3 else 2)
    row = 0 if y < 1 / 3 else (1 if y < 2 / 3 else 2)
    names = [
        ["top-left", "top", "top-right"],
        ["left", "center", "right"],
        ["bottom-left", "bottom", "bottom-right"],
    ]
    return names[row][col]


def _region_phrase(obj: CocoObject) -> str:
    cx, cy = obj.center
    return region_of_point(cx, cy).replace("-", " ")


def _fmt_box(box) -> str:
    x, y, w, h = box
    return f"x {x} y {y} w {w} h {h}"


# ---------------------------------------------------------------------------
# Instruction grounding: utterance + canvas -> a unique executable edit list,
# or None when the instruction is ambiguous or names nothing on the canvas.

def _verb_group(tokens) -> str | None:
    for tok in tokens:
        if tok in _ADD_VERBS:
            return "add"
        if tok in _REMOVE_VERBS:
            return "remove"
        if tok in _MOVE_VERBS:
            return "move"
        if tok in _RESIZE_VERBS:
            return "resize"
    return None


def _shape2d_matches(canvas: Layout, color: str | None, shape: str | None):
    return [
        o
        for o in canvas.objects
        if (color is None or o.color == color) and (shape is None or o.shape == shape)
    ]


def _single(values: set):
    return next(iter(values)) if len(values) == 1 else None


def _ground_shape2d(tokens, mentions: MentionSet, canvas: Layout):
    verb = _verb_group(tokens)
    colors, shapes = set(mentions.colors), set(mentions.shapes)
    cells = [loc.cell for loc in mentions.locations if loc.mode == "absolute_cell"]
    if len(colors) > 1 or len(shapes) > 1:
        return None
    color, shape = _single(colors), _single(shapes)

    if verb == "add":
        if color is None or shape is None or len(cells) != 1:
            return None
        if any(c > 1 for c in mentions.counts):
            return None
        obj = ShapeObject(shape=shape, color=color, row=cells[0][0], col=cells[0][1])
        return [EditOp(op="add", obj=obj)]

    if verb == "remove":
        if len(cells) == 1:
            target = canvas.cell_map().get(cells[0])
            if target is None:
                return None
            if color and target.color != color or shape and target.shape != shape:
                return None
            return [EditOp(op="remove", cell=cells[0])]
        if not cells and (color or shape):
            matches = _shape2d_matches(canvas, color, shape)
            if len(matches) != 1:
                return None
            return [EditOp(op="remove", cell=matches[0].cell)]
        return None

    if verb == "move":
        if len(cells) == 2:
            src, dst = cells
            target = canvas.cell_map().get(src)
            if target is None:
                return None
            if color and target.color != color or shape and target.shape != shape:
                return None
            return [EditOp(op="move", cell=src, dest=dst)]
        if len(cells) == 1 and (color or shape):
            matches = _shape2d_matches(canvas, color, shape)
            if len(matches) != 1:
                return None
            return [EditOp(op="move", cell=matches[0].cell, dest=cells[0])]
        return None

    return None


_COORD_KEYS = (("x",), ("y",), ("w", "width"), ("h", "height"))


def _coord_groups(tokens) -> list[tuple[float, float, float, float]]:
    """Every `x N y N w N h N` run, in utterance order."""
    def number(tok):
        try:
            return float(tok)
        except ValueError:
            return None

    groups = []
    i = 0
    while i < len(tokens):
        values = []
        j = i
        for names in _COORD_KEYS:
            if j + 1 < len(tokens) and tokens[j] in names:
                val = number(tokens[j + 1])
                if val is None:
                    break
                values.append(val)
                j += 2
            else:
                break
        if len(values) == 4:
            groups.append(tuple(values))
            i = j
        else:
            i += 1
    return groups


def _coco_by_box(canvas: Layout, label: str, box) -> CocoObject | None:
    # identical boxes of one class are interchangeable targets
    hits = [o for o in canvas.objects if o.class_label == label and o.box == box]
    return hits[0] if hits else None


def _ground_coco(tokens, mentions: MentionSet, canvas: Layout):
    verb = _verb_group(tokens)
    labels = set(mentions.classes)
    if len(labels) != 1:
        return None
    label = next(iter(labels))
    groups = _coord_groups(tokens)
    regions = [loc.region for loc in mentions.locations if loc.mode == "region"]

    if verb == "add":
        if not groups:
            return None
        x, y, w, h = groups[0]
        next_id = max((o.id for o in canvas.objects), default=0) + 1
        try:
            obj = CocoObject(id=next_id, class_label=label, x=x, y=y, w=w, h=h)
        except ValueError:
            return None
        return [EditOp(op="add", obj=obj)]

    if verb == "remove":
        if groups:
            target = _coco_by_box(canvas, label, groups[0])
            return [EditOp(op="remove", target_id=target.id)] if target else None
        candidates = [o for o in canvas.objects if o.class_label == label]
        if regions:
            candidates = [o for o in candidates if _region_phrase(o) == regions[0].replace("-", " ")]
        if len(candidates) != 1:
            return None
        return [EditOp(op="remove", target_id=candidates[0].id)]

    if verb in ("move", "resize"):
        if len(groups) < 2:
            return None
        target = _coco_by_box(canvas, label, groups[0])
        if target is None:
            return None
        x, y, w, h = groups[1]
        try:
            CocoObject(id=target.id, class_label=label, x=x, y=y, w=w, h=h)
        except ValueError:
            return None
        op = "move" if (w, h) == (target.w, target.h) else "resize"
        return [EditOp(op=op, target_id=target.id, box=(x, y, w, h))]

    return None


def ground_instruction(utterance: str, canvas: Layout, class_lexicon=()):
    """Resolve an instruction to its unique executable edit list, or None."""
    tokens = normalize(utterance)
    mentions = extract_mentions(tokens, canvas.kind, class_lexicon)
    if canvas.kind == KIND_SHAPE2D:
        return _ground_shape2d(tokens, mentions, canvas)
    return _ground_coco(tokens, mentions, canvas)


# ---------------------------------------------------------------------------
# Synthetic director.

def _coco_differences(reference: Layout, canvas: Layout):
    """Reference objects unmatched on the canvas, and canvas objects unmatched
    in the reference, under exact (class, box) correspondence."""
    pool = list(canvas.objects)
    missing = []
    for ro in sorted(reference.objects, key=lambda o: (o.y, o.x, o.id)):
        hit = next((co for co in pool if co.class_label == ro.class_label and co.box == ro.box), None)
        if hit is not None:
            pool.remove(hit)
        else:
            missing.append(ro)
    surplus = sorted(pool, key=lambda o: (o.y, o.x, o.id))
    return missing, surplus


def _next_shape2d_instruction(reference: Layout, canvas: Layout, templates):
    if exact_match(canvas, reference):
        raise NothingToInstruct("nothing to instruct")
    ops = diff_canvases(canvas, reference)
    rank = {"add": 0, "move": 1, "remove": 2}

    def anchor(op: EditOp):
        if op.op == "add":
            return op.obj.cell
        if op.op == "move":
            return op.dest
        return op.cell

    op = min(ops, key=lambda o: (anchor(o), rank[o.op]))
    cells = canvas.cell_map()
    if op.op == "add":
        o = op.obj
        text = templates["add"].format(
            color=o.color, shape=o.shape, row=o.row + 1, col=o.col + 1
        )
    elif op.op == "move":
        o = cells[op.cell]
        text = templates["move"].format(
            color=o.color, shape=o.shape, row=o.row + 1, col=o.col + 1,
            to_row=op.dest[0] + 1, to_col=op.dest[1] + 1,
        )
    else:
        o = cells[op.cell]
        text = templates["remove"].format(
            color=o.color, shape=o.shape, row=o.row + 1, col=o.col + 1
        )
    return text, [op]


def _next_coco_instruction(reference: Layout, canvas: Layout, templates):
    missing, surplus = _coco_differences(reference, canvas)
    if not missing and not surplus:
        raise NothingToInstruct("nothing to instruct")

    candidates = []
    surplus_pool = list(surplus)
    for ro in missing:
        mate = next((so for so in surplus_pool if so.class_label == ro.class_label), None)
        if mate is not None:
            surplus_pool.remove(mate)
            candidates.append(((ro.y, ro.x, 1), ("fix", mate, ro)))
        else:
            candidates.append(((ro.y, ro.x, 0), ("add", ro, None)))
    for so in surplus_pool:
        candidates.append(((so.y, so.x, 2), ("remove", so, None)))

    _, (action, obj, ref_obj) = min(candidates, key=lambda c: c[0])
    next_id = max((o.id for o in canvas.objects), default=0) + 1
    fields = {
        "class": obj.class_label,
        "region": _region_phrase(obj),
        "box": _fmt_box(obj.box),
    }
    if action == "add":
        text = templates["coco_add"].format(**fields)
        gold = [EditOp(op="add", obj=CocoObject(
            id=next_id, class_label=obj.class_label, x=obj.x, y=obj.y, w=obj.w, h=obj.h
        ))]
    elif action == "fix":
        verb = "move" if (obj.w, obj.h) == (ref_obj.w, ref_obj.h) else "resize"
        text = templates["coco_fix"].format(
            verb=verb, to_box=_fmt_box(ref_obj.box), **fields
        )
        gold = [EditOp(op=verb, target_id=obj.id, box=ref_obj.box)]
    else:
        text = templates["coco_remove"].format(**fields)
        gold = [EditOp(op="remove", target_id=obj.id)]
    return text, gold


def next_instruction(reference: Layout, canvas: Layout, rng_seed: int = 0,
                     templates: dict[str, str] | None = None):
    """Name the first difference in row-major order as a template instruction.

    Returns ``(utterance, gold_edits)``.  The default catalog renders fixed
    strings, so the seed only matters if variant templates are configured.
    """
    if reference.kind != canvas.kind:
        raise ValueError("reference and canvas kinds differ")
    templates = templates or DEFAULT_TEMPLATES
    if reference.kind == KIND_SHAPE2D:
        return _next_shape2d_instruction(reference, canvas, templates)
    return _next_coco_instruction(reference, canvas, templates)


# ---------------------------------------------------------------------------
# Probes.

def make_probe(
    canvas: Layout,
    kind: str,
    rng_seed: int,
    class_lexicon=(),
    injected_at: int = 0,
) -> Probe:
    """Build a non-executable instruction of the requested kind.

    Construction re-checks non-executability through the same grounding the
    designer policy uses; a probe that grounds would be a contradiction.
    """
    if kind not in PROBE_KINDS:
        raise ValueError(f"unknown probe kind {kind!r}")
    rng = random.Random(rng_seed)

    if canvas.kind == KIND_SHAPE2D:
        utterance = _shape2d_probe_text(canvas, kind, rng)
    else:
        utterance = _coco_probe_text(canvas, kind, rng, class_lexicon)

    if ground_instruction(utterance, canvas, class_lexicon) is not None:
        raise ProbeUnavailable(f"probe-unavailable: {kind} grounded unexpectedly")
    probe_id = "probe-" + "".join(rng.choice("0123456789abcdef") for _ in range(8))
    return Probe(id=probe_id, kind=kind, utterance=utterance, injected_at=injected_at)


def _shape2d_probe_text(canvas: Layout, kind: str, rng: random.Random) -> str:
    if kind == "nonviable_target":
        present = {(o.color, o.shape) for o in canvas.objects}
        absent = [(c, s) for c in COLORS for s in SHAPES if (c, s) not in present]
        if not absent:
            raise ProbeUnavailable("probe-unavailable: every color/shape combination is present")
        color, shape = absent[rng.randrange(len(absent))]
        row, col = rng.randrange(5) + 1, rng.randrange(5) + 1
        return f"move the {color} {shape} to row {row} column {col}"
    if kind == "ambiguous_location":
        return f"add a {rng.choice(COLORS)} {rng.choice(SHAPES)}"
    first, second = rng.sample(COLORS, 2)
    row, col = rng.randrange(5) + 1, rng.randrange(5) + 1
    return f"add a {first} {second} {rng.choice(SHAPES)} at row {row} column {col}"


def _coco_probe_text(canvas: Layout, kind: str, rng: random.Random, class_lexicon) -> str:
    labels = sorted({str(c).lower() for c in class_lexicon})
    if not labels:
        raise ProbeUnavailable("probe-unavailable: no class lexicon for coco probes")
    if kind == "nonviable_target":
        present = {o.class_label for o in canvas.objects}
        absent = [c for c in labels if c not in present]
        if not absent:
            raise ProbeUnavailable("probe-unavailable: every known class is on the canvas")
        region = rng.choice(REGION_NAMES)
        return f"move the {absent[rng.randrange(len(absent))]} to the {region}"
    if kind == "ambiguous_location":
        return f"add a {labels[rng.randrange(len(labels))]}"
    if len(labels) < 2:
        raise ProbeUnavailable("probe-unavailable: need two classes for a contradiction")
    first, second = rng.sample(labels, 2)
    return f"add a {first} that is also a {second} at the {rng.choice(REGION_NAMES)}"


def score_response(probe: Probe, response: Turn) -> str:
    """Grade the designer turn that followed a probe: ``"pass"`` or ``"fail"``.

    Depends only on the turn's act and tokens, never on session history.
    """
    tokens = normalize(response.utterance)
    return "pass" if probe_pass(response.act, tokens) else "fail"


# ---------------------------------------------------------------------------
# Rule-based policies for self-play.

def _question_for(utterance: str, canvas: Layout, class_lexicon) -> str:
    tokens = normalize(utterance)
    mentions = extract_mentions(tokens, canvas.kind, class_lexicon)
    colors, shapes = set(mentions.colors), set(mentions.shapes)
    if len(colors) > 1:
        return "which color do you mean?"
    if canvas.kind == KIND_SHAPE2D:
        cells = [loc.cell for loc in mentions.locations if loc.mode == "absolute_cell"]
        desc = " ".join(v for v in (_single(colors), _single(shapes)) if v) or "object"
        if _verb_group(tokens) == "add" and not cells:
            return "where exactly?"
        if colors or shapes:
            matches = _shape2d_matches(canvas, _single(colors), _single(shapes))
            if not matches:
                return f"where is the {desc}?"
            return f"which {desc}?"
        return "can you clarify?"
    labels = set(mentions.classes)
    if len(labels) == 1:
        label = next(iter(labels))
        if not any(o.class_label == label for o in canvas.objects):
            return f"where is the {label}?"
        return f"which {label}?"
    if _verb_group(tokens) == "add":
        return "where exactly?"
    return "can you clarify?"


def designer_policy(
    state: DialogState,
    rng_seed: int = 0,
    instruction: str | None = None,
    class_lexicon=(),
    author: str = "designer-bot",
    timestamp: float = 0.0,
) -> Turn:
    """Execute the pending instruction when it grounds uniquely, else ask.

    ``instruction`` overrides the transcript (the dispatcher passes the
    probe utterance for probed jobs).
    """
    if instruction is None:
        last_director = next((t for t in reversed(state.transcript) if t.role == DIRECTOR), None)
        instruction = last_director.utterance if last_director else ""
    edits = ground_instruction(instruction, state.canvas, class_lexicon) if instruction else None
    index = len(state.transcript)
    if edits:
        canvas_after = apply_edits(state.canvas, edits)
        return Turn(
            index=index, role=DESIGNER, act=DialogAct.EDIT, utterance="",
            edits=tuple(edits), canvas_after=canvas_after, author=author,
            origin=SYNTHETIC, timestamp=timestamp,
        )
    question = _question_for(instruction, state.canvas, class_lexicon) if instruction else (
        "what should i draw?"
    )
    return Turn(
        index=index, role=DESIGNER, act=DialogAct.QUESTION, utterance=question,
        edits=(), canvas_after=state.canvas, author=author,
        origin=SYNTHETIC, timestamp=timestamp,
    )


def director_policy(
    state: DialogState,
    rng_seed: int = 0,
    author: str = "director-bot",
    timestamp: float = 0.0,
) -> Turn:
    """Confirm on a full match, answer pending questions, else instruct.

    Answers re-deliver the current best instruction, which is how a probe
    detour gets the dialog back on track.
    """
    acts = legal_acts(state)
    term = check_termination(state)
    index = len(state.transcript)
    matched = (
        term.match_now is True
        if state.canvas.kind == KIND_SHAPE2D
        else term.match_now == 1.0
    )
    if DialogAct.CONFIRM_DONE in acts and matched:
        return Turn(
            index=index, role=DIRECTOR, act=DialogAct.CONFIRM_DONE, utterance="done",
            edits=(), canvas_after=state.canvas, author=author,
            origin=SYNTHETIC, timestamp=timestamp,
        )
    utterance, _gold = next_instruction(state.reference, state.canvas, rng_seed)
    act = DialogAct.ANSWER if DialogAct.ANSWER in acts else DialogAct.INSTRUCT
    return Turn(
        index=index, role=DIRECTOR, act=act, utterance=utterance,
        edits=(), canvas_after=state.canvas, author=author,
        origin=SYNTHETIC, timestamp=timestamp,
    )
