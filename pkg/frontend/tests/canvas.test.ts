import { describe, expect, it } from "vitest";

import { BoxCanvas, GridCanvas } from "../src/canvas.js";
import type { Layout } from "../src/types.js";

const gridLayout: Layout = {
  kind: "shape2d",
  scenario: "2d-shape-random",
  objects: [
    { shape: "circle", color: "red", row: 0, col: 0 },
    { shape: "square", color: "blue", row: 2, col: 3 },
  ],
};

const boxLayout: Layout = {
  kind: "coco",
  scenario: "coco-simple",
  objects: [
    { id: 1, class_label: "dog", x: 0.1, y: 0.2, w: 0.25, h: 0.3, name: null },
    { id: 4, class_label: "cat", x: 0.5, y: 0.55, w: 0.2, h: 0.2, name: "tom" },
  ],
};

describe("GridCanvas", () => {
  it("round-trips with no edits", () => {
    expect(new GridCanvas(gridLayout).toLayout()).toEqual(gridLayout);
  });

  it("place replaces occupants and move relocates", () => {
    const canvas = new GridCanvas(gridLayout);
    canvas.place("green", "triangle", 0, 0);
    expect(canvas.at(0, 0)).toMatchObject({ color: "green", shape: "triangle" });
    expect(canvas.move(0, 0, 4, 4)).toBe(true);
    expect(canvas.at(0, 0)).toBeUndefined();
    expect(canvas.at(4, 4)).toMatchObject({ color: "green", shape: "triangle" });
    expect(canvas.move(1, 1, 0, 0)).toBe(false); // nothing there
  });

  it("refuses out-of-grid cells", () => {
    const canvas = new GridCanvas(gridLayout);
    expect(() => canvas.place("red", "circle", 5, 0)).toThrow();
  });
});

describe("BoxCanvas", () => {
  it("round-trips with no edits", () => {
    expect(new BoxCanvas(boxLayout).toLayout()).toEqual(boxLayout);
  });

  it("allocates fresh ids and clamps geometry", () => {
    const canvas = new BoxCanvas(boxLayout);
    const id = canvas.add("bird", 0.95, 0.5, 0.2, 0.2);
    expect(id).toBe(5);
    const obj = canvas.get(id)!;
    expect(obj.x + obj.w).toBeLessThanOrEqual(1);
    canvas.moveTo(id, -0.5, 0.2);
    expect(canvas.get(id)!.x).toBe(0);
    canvas.resizeTo(id, 2, 2);
    expect(canvas.get(id)!.w).toBeLessThanOrEqual(1);
  });

  it("renames", () => {
    const canvas = new BoxCanvas(boxLayout);
    expect(canvas.rename(1, "rex")).toBe(true);
    expect(canvas.get(1)!.name).toBe("rex");
    expect(canvas.rename(99, "x")).toBe(false);
  });
});
