/**
 * Editable canvas models. Edits are optimistic and purely local; the server
 * sees only the serialized layout at submit time, and serialization
 * round-trips exactly (render then serialize equals the received model).
 */
import {
  COLORS,
  GRID,
  SHAPES,
  type CocoObject,
  type Layout,
  type ShapeObject,
} from "./types.js";

export class GridCanvas {
  private cells = new Map<string, ShapeObject>();
  readonly scenario: string;

  constructor(layout: Layout) {
    if (layout.kind !== "shape2d") throw new Error("GridCanvas needs a shape2d layout");
    this.scenario = layout.scenario;
    for (const obj of layout.objects as ShapeObject[]) {
      this.cells.set(key(obj.row, obj.col), obj);
    }
  }

  at(row: number, col: number): ShapeObject | undefined {
    return this.cells.get(key(row, col));
  }

  /** Placing on an occupied cell replaces the occupant, like the server. */
  place(color: ShapeObject["color"], shape: ShapeObject["shape"], row: number, col: number): void {
    checkCell(row, col);
    this.cells.set(key(row, col), { shape, color, row, col });
  }

  remove(row: number, col: number): boolean {
    return this.cells.delete(key(row, col));
  }

  move(fromRow: number, fromCol: number, toRow: number, toCol: number): boolean {
    checkCell(toRow, toCol);
    const obj = this.cells.get(key(fromRow, fromCol));
    if (!obj) return false;
    this.cells.delete(key(fromRow, fromCol));
    this.cells.set(key(toRow, toCol), { ...obj, row: toRow, col: toCol });
    return true;
  }

  toLayout(): Layout {
    const objects = [...this.cells.values()].sort((a, b) =>
      a.row === b.row ? a.col - b.col : a.row - b.row,
    );
    return { kind: "shape2d", scenario: this.scenario, objects };
  }
}

export class BoxCanvas {
  private boxes = new Map<number, CocoObject>();
  readonly scenario: string;

  constructor(layout: Layout) {
    if (layout.kind !== "coco") throw new Error("BoxCanvas needs a coco layout");
    this.scenario = layout.scenario;
    for (const obj of layout.objects as CocoObject[]) {
      this.boxes.set(obj.id, obj);
    }
  }

  get(id: number): CocoObject | undefined {
    return this.boxes.get(id);
  }

  ids(): number[] {
    return [...this.boxes.keys()].sort((a, b) => a - b);
  }

  add(classLabel: string, x: number, y: number, w: number, h: number): number {
    const id = Math.max(0, ...this.boxes.keys()) + 1;
    this.boxes.set(id, { id, class_label: classLabel, ...clampBox(x, y, w, h), name: null });
    return id;
  }

  moveTo(id: number, x: number, y: number): boolean {
    const obj = this.boxes.get(id);
    if (!obj) return false;
    const { x: cx, y: cy } = clampBox(x, y, obj.w, obj.h);
    this.boxes.set(id, { ...obj, x: cx, y: cy });
    return true;
  }

  resizeTo(id: number, w: number, h: number): boolean {
    const obj = this.boxes.get(id);
    if (!obj) return false;
    const next = clampBox(obj.x, obj.y, w, h);
    this.boxes.set(id, { ...obj, w: next.w, h: next.h });
    return true;
  }

  rename(id: number, name: string): boolean {
    const obj = this.boxes.get(id);
    if (!obj) return false;
    this.boxes.set(id, { ...obj, name });
    return true;
  }

  removeBox(id: number): boolean {
    return this.boxes.delete(id);
  }

  toLayout(): Layout {
    return {
      kind: "coco",
      scenario: this.scenario,
      objects: this.ids().map((id) => this.boxes.get(id)!),
    };
  }
}

function key(row: number, col: number): string {
  return `${row},${col}`;
}

function checkCell(row: number, col: number): void {
  if (row < 0 || row >= GRID || col < 0 || col >= GRID) {
    throw new Error(`cell (${row},${col}) outside the ${GRID}x${GRID} grid`);
  }
}

function clampBox(x: number, y: number, w: number, h: number) {
  const cw = Math.min(Math.max(w, 0.01), 1);
  const ch = Math.min(Math.max(h, 0.01), 1);
  return {
    x: Math.min(Math.max(x, 0), 1 - cw),
    y: Math.min(Math.max(y, 0), 1 - ch),
    w: cw,
    h: ch,
  };
}

export const PALETTE: Array<{ color: (typeof COLORS)[number]; shape: (typeof SHAPES)[number] }> =
  COLORS.flatMap((color) => SHAPES.map((shape) => ({ color, shape })));
