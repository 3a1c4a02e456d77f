"""Canvas layouts, edit operations, generators, and similarity metrics.

Two layout kinds share a single immutable representation: a 5x5 grid of
colored shape primitives pinned to cells, and a free-form arrangement of
class-labeled boxes in normalized [0, 1] coordinates.  Edits never mutate;
:func:`apply_edit` returns a fresh layout.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace

GRID = 5
SHAPES = ("circle", "square", "triangle")
COLORS = ("blue", "red", "green")

KIND_SHAPE2D = "shape2d"
KIND_COCO = "coco"

SCENARIO_RANDOM = "2d-shape-random"
SCENARIO_PATTERN = "2d-shape-pattern"
SCENARIO_COCO_SIMPLE = "coco-simple"
SCENARIO_COCO_COMPLEX = "coco-complex"

SHAPE2D_SCENARIOS = (SCENARIO_RANDOM, SCENARIO_PATTERN)
COCO_SCENARIOS = (SCENARIO_COCO_SIMPLE, SCENARIO_COCO_COMPLEX)

# 4-adjacent neighbor offsets, fixed order for deterministic generation.
NEIGHBOR_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))


class EditRejected(Exception):
    """An edit that cannot be applied at all: wrong kind, bad op, out of bounds."""


@dataclass(frozen=True)
class ShapeObject:
    shape: str
    color: str
    row: int
    col: int

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.color not in COLORS:
            raise ValueError(f"unknown color {self.color!r}")
        if not (0 <= self.row < GRID and 0 <= self.col < GRID):
            raise ValueError(f"cell ({self.row},{self.col}) outside the {GRID}x{GRID} grid")

    @property
    def cell(self) -> tuple[int, int]:
        return (self.row, self.col)


@dataclass(frozen=True)
class CocoObject:
    id: int
    class_label: str
    x: float
    y: float
    w: float
    h: float
    name: str | None = None

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"object {self.id}: box must have positive size")
        if self.x < 0 or self.y < 0 or self.x + self.w > 1 + 1e-9 or self.y + self.h > 1 + 1e-9:
            raise ValueError(f"object {self.id}: box exceeds the unit canvas")

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2, self.y + self.h / 2)


@dataclass(frozen=True)
class Layout:
    """An arrangement of objects; doubles as the hidden reference and the live canvas."""

    kind: str
    scenario: str
    objects: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.kind == KIND_SHAPE2D:
            if self.scenario not in SHAPE2D_SCENARIOS:
                raise ValueError(f"scenario {self.scenario!r} is not a shape2d scenario")
            if not all(isinstance(o, ShapeObject) for o in self.objects):
                raise ValueError("shape2d layouts hold ShapeObject instances only")
            cells = [o.cell for o in self.objects]
            if len(set(cells)) != len(cells):
                raise ValueError("at most one object per grid cell")
            ordered = tuple(sorted(self.objects, key=lambda o: o.cell))
        elif self.kind == KIND_COCO:
            if self.scenario not in COCO_SCENARIOS:
                raise ValueError(f"scenario {self.scenario!r} is not a coco scenario")
            if not all(isinstance(o, CocoObject) for o in self.objects):
                raise ValueError("coco layouts hold CocoObject instances only")
            ids = [o.id for o in self.objects]
            if len(set(ids)) != len(ids):
                raise ValueError("object ids must be unique within a layout")
            ordered = tuple(sorted(self.objects, key=lambda o: o.id))
        else:
            raise ValueError(f"unknown layout kind {self.kind!r}")
        object.__setattr__(self, "objects", ordered)

    def empty_like(self) -> "Layout":
        return Layout(kind=self.kind, scenario=self.scenario, objects=())

    def cell_map(self) -> dict[tuple[int, int], ShapeObject]:
        return {o.cell: o for o in self.objects}

    def by_id(self) -> dict[int, CocoObject]:
        return {o.id: o for o in self.objects}


@dataclass(frozen=True)
class EditOp:
    """One atomic canvas mutation.

    shape2d edits address cells (``cell`` is the target before the edit,
    ``dest`` the move destination); coco edits address object ids, with
    ``box`` carrying move/resize payloads and ``name`` the rename payload.
    ``obj`` is the add payload for either kind.
    """

    op: str
    cell: tuple[int, int] | None = None
    dest: tuple[int, int] | None = None
    target_id: int | None = None
    obj: ShapeObject | CocoObject | None = None
    box: tuple[float, float, float, float] | None = None
    name: str | None = None


@dataclass(frozen=True)
class PatternRules:
    """Production rules for the seed-and-expand pattern generator."""

    seed_count: int = 2
    expansion_prob: float = 0.8
    attribute_copy_prob: float = 0.7
    max_objects: int = 6

    def validate(self) -> None:
        if not (0.0 <= self.expansion_prob <= 1.0):
            raise ValueError(f"expansion_prob {self.expansion_prob} outside [0, 1]")
        if not (0.0 <= self.attribute_copy_prob <= 1.0):
            raise ValueError(f"attribute_copy_prob {self.attribute_copy_prob} outside [0, 1]")
        if not (1 <= self.seed_count <= self.max_objects <= GRID * GRID):
            raise ValueError(
                f"need 1 <= seed_count ({self.seed_count}) <= max_objects "
                f"({self.max_objects}) <= {GRID * GRID}"
            )


DEFAULT_PATTERN_RULES = PatternRules()


def generate_random_shape_layout(seed: int) -> Layout:
    """4 to 6 objects with shape, color, and cell drawn uniformly at random."""
    rng = random.Random(seed)
    count = rng.randint(4, 6)
    cells = rng.sample([(r, c) for r in range(GRID) for c in range(GRID)], count)
    objects = [
        ShapeObject(shape=rng.choice(SHAPES), color=rng.choice(COLORS), row=r, col=c)
        for r, c in cells
    ]
    return Layout(kind=KIND_SHAPE2D, scenario=SCENARIO_RANDOM, objects=objects)


def _free_neighbors(cell: tuple[int, int], occupied: set) -> list[tuple[int, int]]:
    out = []
    for dr, dc in NEIGHBOR_OFFSETS:
        nb = (cell[0] + dr, cell[1] + dc)
        if 0 <= nb[0] < GRID and 0 <= nb[1] < GRID and nb not in occupied:
            out.append(nb)
    return out


def generate_pattern_shape_layout(seed: int, rules: PatternRules = DEFAULT_PATTERN_RULES) -> Layout:
    """Seed-and-expand generation biased toward 4-adjacent clusters.

    Seed objects are placed uniformly; each expansion step picks a random
    existing object and, with ``expansion_prob``, grows into a free 4-adjacent
    cell, copying shape and color independently with ``attribute_copy_prob``.
    Stops at ``max_objects`` or after 25 consecutive failed proposals, then
    pads with random objects up to 4 while free cells remain.
    """
    rules.validate()
    rng = random.Random(seed)
    all_cells = [(r, c) for r in range(GRID) for c in range(GRID)]
    placed: list[ShapeObject] = []
    occupied: set = set()

    for r, c in rng.sample(all_cells, rules.seed_count):
        placed.append(ShapeObject(shape=rng.choice(SHAPES), color=rng.choice(COLORS), row=r, col=c))
        occupied.add((r, c))

    failures = 0
    while len(placed) < rules.max_objects and failures < 25:
        parent = placed[rng.randrange(len(placed))]
        if rng.random() >= rules.expansion_prob:
            failures += 1
            continue
        free = _free_neighbors(parent.cell, occupied)
        if not free:
            failures += 1
            continue
        r, c = free[rng.randrange(len(free))]
        shape = parent.shape if rng.random() < rules.attribute_copy_prob else rng.choice(SHAPES)
        color = parent.color if rng.random() < rules.attribute_copy_prob else rng.choice(COLORS)
        placed.append(ShapeObject(shape=shape, color=color, row=r, col=c))
        occupied.add((r, c))
        failures = 0

    # Degenerate rule settings can stall below 4 objects; pad while space permits.
    free_cells = [cell for cell in all_cells if cell not in occupied]
    while len(placed) < 4 and free_cells:
        idx = rng.randrange(len(free_cells))
        r, c = free_cells.pop(idx)
        placed.append(ShapeObject(shape=rng.choice(SHAPES), color=rng.choice(COLORS), row=r, col=c))
        occupied.add((r, c))

    return Layout(kind=KIND_SHAPE2D, scenario=SCENARIO_PATTERN, objects=placed)


def _check_cell(cell) -> tuple[int, int]:
    if (
        not isinstance(cell, tuple)
        or len(cell) != 2
        or not all(isinstance(v, int) for v in cell)
    ):
        raise EditRejected(f"malformed cell {cell!r}")
    if not (0 <= cell[0] < GRID and 0 <= cell[1] < GRID):
        raise EditRejected(f"cell {cell} outside the {GRID}x{GRID} grid")
    return cell


def apply_edit(canvas: Layout, edit: EditOp) -> tuple[Layout, str | None]:
    """Apply one edit, returning ``(new_canvas, flag)``.

    ``flag`` is ``"target-missing"`` when a remove/move/resize/rename named a
    cell or id that holds nothing (the edit is then a no-op), else ``None``.
    Structural problems (wrong kind, out-of-bounds destination, bad payload)
    raise :class:`EditRejected`.
    """
    if canvas.kind == KIND_SHAPE2D:
        return _apply_shape2d(canvas, edit)
    return _apply_coco(canvas, edit)


def _apply_shape2d(canvas: Layout, edit: EditOp) -> tuple[Layout, str | None]:
    cells = canvas.cell_map()
    if edit.op == "add":
        if not isinstance(edit.obj, ShapeObject):
            raise EditRejected("add on a shape2d canvas needs a ShapeObject payload")
        cells[edit.obj.cell] = edit.obj  # replaces any occupant
        return replace(canvas, objects=tuple(cells.values())), None
    if edit.op == "remove":
        cell = _check_cell(edit.cell)
        if cell not in cells:
            return canvas, "target-missing"
        del cells[cell]
        return replace(canvas, objects=tuple(cells.values())), None
    if edit.op == "move":
        src = _check_cell(edit.cell)
        dst = _check_cell(edit.dest)
        if src not in cells:
            return canvas, "target-missing"
        moved = cells.pop(src)
        cells[dst] = ShapeObject(shape=moved.shape, color=moved.color, row=dst[0], col=dst[1])
        return replace(canvas, objects=tuple(cells.values())), None
    if edit.op in ("resize", "rename"):
        raise EditRejected(f"{edit.op} applies only to coco layouts")
    raise EditRejected(f"unknown edit op {edit.op!r}")


def _apply_coco(canvas: Layout, edit: EditOp) -> tuple[Layout, str | None]:
    objs = canvas.by_id()
    if edit.op == "add":
        if not isinstance(edit.obj, CocoObject):
            raise EditRejected("add on a coco canvas needs a CocoObject payload")
        objs[edit.obj.id] = edit.obj
        return replace(canvas, objects=tuple(objs.values())), None
    if edit.target_id is None:
        raise EditRejected(f"{edit.op} on a coco canvas needs a target id")
    if edit.target_id not in objs:
        return canvas, "target-missing"
    target = objs[edit.target_id]
    if edit.op == "remove":
        del objs[edit.target_id]
    elif edit.op in ("move", "resize"):
        if edit.box is None or len(edit.box) != 4:
            raise EditRejected(f"{edit.op} needs a 4-element box payload")
        x, y, w, h = edit.box
        try:
            objs[edit.target_id] = replace(target, x=x, y=y, w=w, h=h)
        except ValueError as exc:
            raise EditRejected(str(exc)) from exc
    elif edit.op == "rename":
        objs[edit.target_id] = replace(target, name=edit.name)
    else:
        raise EditRejected(f"unknown edit op {edit.op!r}")
    return replace(canvas, objects=tuple(objs.values())), None


def apply_edits(canvas: Layout, edits) -> Layout:
    """Fold a sequence of edits; target-missing edits fall through as no-ops."""
    for edit in edits:
        canvas, _ = apply_edit(canvas, edit)
    return canvas


def exact_match(a: Layout, b: Layout) -> bool:
    """Set equality of (shape, color, cell) triples; shape2d only."""
    if a.kind != KIND_SHAPE2D or b.kind != KIND_SHAPE2D:
        raise ValueError("exact_match compares shape2d layouts; use coco_similarity for coco")
    triples = lambda lay: {(o.shape, o.color, o.row, o.col) for o in lay.objects}
    return triples(a) == triples(b)


def box_iou(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    if a == b:
        return 1.0  # identical boxes must score exactly 1 despite float noise
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    if inter <= 0.0:
        return 0.0
    union = aw * ah + bw * bh - inter
    return min(1.0, inter / union)


def coco_similarity(a: Layout, b: Layout) -> float:
    """Greedy same-class IoU pairing, normalized by the larger object count.

    Advisory score in [0, 1]; equals 1 exactly when the layouts carry the
    same multiset of (class, box) pairs.  Never a termination trigger.
    """
    if a.kind != KIND_COCO or b.kind != KIND_COCO:
        raise ValueError("coco_similarity compares coco layouts; use exact_match for shape2d")
    if not a.objects and not b.objects:
        return 1.0
    denom = max(len(a.objects), len(b.objects))
    if not a.objects or not b.objects:
        return 0.0
    pairs = []
    for i, oa in enumerate(a.objects):
        for j, ob in enumerate(b.objects):
            if oa.class_label != ob.class_label:
                continue
            iou = box_iou(oa.box, ob.box)
            if iou > 0.0:
                pairs.append((-iou, i, j))
    pairs.sort()
    used_a: set = set()
    used_b: set = set()
    total = 0.0
    for neg_iou, i, j in pairs:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        total += -neg_iou
    return total / denom


def _pair_moves(removed: list[ShapeObject], added: list[ShapeObject]):
    """Greedy same-attribute pairing, row-major priority on the removed side."""
    moves: list[tuple[ShapeObject, ShapeObject]] = []
    pool = sorted(added, key=lambda o: o.cell)
    for old in sorted(removed, key=lambda o: o.cell):
        match = next((n for n in pool if (n.shape, n.color) == (old.shape, old.color)), None)
        if match is not None:
            pool.remove(match)
            moves.append((old, match))
    paired_removed = {m[0].cell for m in moves}
    paired_added = {m[1].cell for m in moves}
    leftovers_removed = [o for o in removed if o.cell not in paired_removed]
    leftovers_added = [o for o in added if o.cell not in paired_added]
    return moves, leftovers_removed, leftovers_added


def _order_shape2d_ops(prev: Layout, removes, moves, adds) -> list[EditOp]:
    """Removes first, then moves scheduled so destinations are free, then adds.

    A cycle of moves (e.g. a swap) cannot be serialized on a full grid; the
    first pending move is demoted to a remove now plus an add at the end.
    """
    ops = [EditOp(op="remove", cell=o.cell) for o in sorted(removes, key=lambda o: o.cell)]
    sim = apply_edits(prev, ops)
    pending = sorted(moves, key=lambda m: m[0].cell)
    trailing: list[EditOp] = []
    while pending:
        occupied = {o.cell for o in sim.objects}
        ready = next((m for m in pending if m[1].cell not in occupied), None)
        if ready is not None:
            pending.remove(ready)
            op = EditOp(op="move", cell=ready[0].cell, dest=ready[1].cell)
        else:
            old, new = pending.pop(0)
            op = EditOp(op="remove", cell=old.cell)
            trailing.append(EditOp(op="add", obj=new))
        ops.append(op)
        sim, _ = apply_edit(sim, op)
    ops.extend(EditOp(op="add", obj=o) for o in sorted(adds, key=lambda o: o.cell))
    ops.extend(trailing)
    return ops


def diff_canvases(prev: Layout, next_: Layout) -> list[EditOp]:
    """Minimal edit list turning ``prev`` into ``next_`` under :func:`apply_edit`.

    For shape2d, removed/added objects of equal shape and color pair into
    moves where possible; for coco, objects correspond by id.
    """
    if prev.kind != next_.kind:
        raise ValueError("diff_canvases needs layouts of the same kind")
    if prev.kind == KIND_SHAPE2D:
        prev_map, next_map = prev.cell_map(), next_.cell_map()
        removed = [o for c, o in prev_map.items() if next_map.get(c) != o]
        added = [o for c, o in next_map.items() if prev_map.get(c) != o]
        moves, removes, adds = _pair_moves(removed, added)
        return _order_shape2d_ops(prev, removes, moves, adds)

    prev_ids, next_ids = prev.by_id(), next_.by_id()
    ops: list[EditOp] = []
    for oid in sorted(prev_ids.keys() - next_ids.keys()):
        ops.append(EditOp(op="remove", target_id=oid))
    for oid in sorted(prev_ids.keys() & next_ids.keys()):
        old, new = prev_ids[oid], next_ids[oid]
        if old.class_label != new.class_label:
            ops.append(EditOp(op="remove", target_id=oid))
            ops.append(EditOp(op="add", obj=new))
            continue
        if old.box != new.box:
            op = "move" if (old.w, old.h) == (new.w, new.h) else "resize"
            ops.append(EditOp(op=op, target_id=oid, box=new.box))
        if old.name != new.name:
            ops.append(EditOp(op="rename", target_id=oid, name=new.name))
    for oid in sorted(next_ids.keys() - prev_ids.keys()):
        ops.append(EditOp(op="add", obj=next_ids[oid]))
    return ops


def adjacency_fraction(layout: Layout) -> float:
    """Fraction of objects with at least one 4-adjacent neighbor."""
    cells = {o.cell for o in layout.objects}
    if not cells:
        return 0.0
    touching = sum(
        1
        for (r, c) in cells
        if any((r + dr, c + dc) in cells for dr, dc in NEIGHBOR_OFFSETS)
    )
    return touching / len(cells)


# ---------------------------------------------------------------------------
# JSON-record serialization (field names are part of the wire format).

def object_to_dict(obj) -> dict:
    if isinstance(obj, ShapeObject):
        return {"shape": obj.shape, "color": obj.color, "row": obj.row, "col": obj.col}
    return {
        "id": obj.id,
        "class_label": obj.class_label,
        "x": obj.x,
        "y": obj.y,
        "w": obj.w,
        "h": obj.h,
        "name": obj.name,
    }


def layout_to_dict(layout: Layout) -> dict:
    return {
        "kind": layout.kind,
        "scenario": layout.scenario,
        "objects": [object_to_dict(o) for o in layout.objects],
    }


def layout_from_dict(data: dict) -> Layout:
    kind = data["kind"]
    if kind == KIND_SHAPE2D:
        objects = [
            ShapeObject(shape=o["shape"], color=o["color"], row=o["row"], col=o["col"])
            for o in data["objects"]
        ]
    else:
        objects = [
            CocoObject(
                id=o["id"],
                class_label=o["class_label"],
                x=o["x"],
                y=o["y"],
                w=o["w"],
                h=o["h"],
                name=o.get("name"),
            )
            for o in data["objects"]
        ]
    return Layout(kind=kind, scenario=data["scenario"], objects=objects)


def edit_to_dict(edit: EditOp) -> dict:
    out: dict = {"op": edit.op}
    if edit.cell is not None:
        out["cell"] = list(edit.cell)
    if edit.dest is not None:
        out["dest"] = list(edit.dest)
    if edit.target_id is not None:
        out["id"] = edit.target_id
    if edit.obj is not None:
        out["object"] = object_to_dict(edit.obj)
    if edit.box is not None:
        out["box"] = list(edit.box)
    if edit.name is not None:
        out["name"] = edit.name
    return out


def edit_from_dict(data: dict, kind: str) -> EditOp:
    obj = None
    if "object" in data:
        o = data["object"]
        if kind == KIND_SHAPE2D:
            obj = ShapeObject(shape=o["shape"], color=o["color"], row=o["row"], col=o["col"])
        else:
            obj = CocoObject(
                id=o["id"], class_label=o["class_label"],
                x=o["x"], y=o["y"], w=o["w"], h=o["h"], name=o.get("name"),
            )
    return EditOp(
        op=data["op"],
        cell=tuple(data["cell"]) if "cell" in data else None,
        dest=tuple(data["dest"]) if "dest" in data else None,
        target_id=data.get("id"),
        obj=obj,
        box=tuple(data["box"]) if "box" in data else None,
        name=data.get("name"),
    )
