import { describe, expect, it } from "vitest";

import {
  DesignerJobSchema,
  DesignerSessionViewSchema,
  DirectorJobSchema,
  LayoutSchema,
  SubmitRequestSchema,
} from "../src/types.js";

const layout = {
  kind: "shape2d" as const,
  scenario: "2d-shape-random",
  objects: [{ shape: "circle", color: "red", row: 0, col: 0 }],
};

const baseJob = {
  job_id: "j2",
  session_id: "s1",
  turn_index: 1,
  lease_expires_at: 1700000000,
  scenario: "2d-shape-random",
  kind: "shape2d" as const,
  history: [],
  canvas: { ...layout, objects: [] },
  legal_acts: ["EDIT", "QUESTION", "OTHER"],
};

describe("payload schemas", () => {
  it("accepts a clean designer job", () => {
    const job = { ...baseJob, role: "designer" as const, instruction: "add a red circle" };
    expect(DesignerJobSchema.parse(job).job_id).toBe("j2");
  });

  it("rejects a designer job that carries reference data", () => {
    const leaky = {
      ...baseJob,
      role: "designer" as const,
      instruction: null,
      reference: layout,
    };
    expect(() => DesignerJobSchema.parse(leaky)).toThrow();
  });

  it("rejects a designer session view with match_now", () => {
    const view = {
      session_id: "s1",
      scenario: "2d-shape-random",
      kind: "shape2d" as const,
      status: "awaiting_designer",
      round_count: 1,
      turn_count: 1,
      history: [],
      canvas: { ...layout, objects: [] },
      match_now: true,
    };
    expect(() => DesignerSessionViewSchema.parse(view)).toThrow();
  });

  it("requires reference and match_now on director jobs", () => {
    const job = {
      ...baseJob,
      role: "director" as const,
      legal_acts: ["INSTRUCT"],
      reference: layout,
      match_now: false,
    };
    expect(DirectorJobSchema.parse(job).match_now).toBe(false);
    const { reference: _omitted, ...missing } = job;
    expect(() => DirectorJobSchema.parse(missing)).toThrow();
  });

  it("validates submit payloads and rejects malformed canvases", () => {
    const good = SubmitRequestSchema.parse({
      worker_id: "w1",
      act: "EDIT",
      utterance: "",
      canvas: layout,
    });
    expect(good.origin).toBe("human");
    expect(() =>
      SubmitRequestSchema.parse({
        worker_id: "w1",
        act: "EDIT",
        utterance: "",
        canvas: { kind: "shape2d", scenario: "x", objects: [{ shape: "blob" }] },
      }),
    ).toThrow();
    expect(() => SubmitRequestSchema.parse({ worker_id: "", act: "EDIT", utterance: "" })).toThrow();
  });

  it("bounds layout coordinates", () => {
    expect(() =>
      LayoutSchema.parse({
        kind: "shape2d",
        scenario: "2d-shape-random",
        objects: [{ shape: "circle", color: "red", row: 7, col: 0 }],
      }),
    ).toThrow();
  });
});
