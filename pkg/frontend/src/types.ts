/**
 * API payload schemas. The designer-side schemas are strict: a payload
 * carrying reference-layout data fails validation, so the information-hiding
 * guarantee is asserted on the client too, not just trusted.
 */
import { z } from "zod";

export const SHAPES = ["circle", "square", "triangle"] as const;
export const COLORS = ["blue", "red", "green"] as const;
export const GRID = 5;

export type Role = "director" | "designer";

export const DIRECTOR_ACTS = ["INSTRUCT", "SUGGEST_FIX", "ANSWER", "CONFIRM_DONE"] as const;
export const DESIGNER_ACTS = ["EDIT", "QUESTION", "OTHER"] as const;

export const ShapeObjectSchema = z.object({
  shape: z.enum(SHAPES),
  color: z.enum(COLORS),
  row: z.number().int().min(0).max(GRID - 1),
  col: z.number().int().min(0).max(GRID - 1),
});
export type ShapeObject = z.infer<typeof ShapeObjectSchema>;

export const CocoObjectSchema = z.object({
  id: z.number().int(),
  class_label: z.string(),
  x: z.number().min(0).max(1),
  y: z.number().min(0).max(1),
  w: z.number().gt(0).max(1),
  h: z.number().gt(0).max(1),
  name: z.string().nullable().optional(),
});
export type CocoObject = z.infer<typeof CocoObjectSchema>;

export const LayoutSchema = z.object({
  kind: z.enum(["shape2d", "coco"]),
  scenario: z.string(),
  objects: z.array(z.union([ShapeObjectSchema, CocoObjectSchema])),
});
export type Layout = z.infer<typeof LayoutSchema>;

export const TurnSchema = z.object({
  index: z.number().int().min(0),
  role: z.enum(["director", "designer"]),
  act: z.string(),
  utterance: z.string(),
  edits: z.array(z.record(z.unknown())),
  canvas_after: LayoutSchema,
  author: z.string(),
  origin: z.string(),
  timestamp: z.number(),
});
export type Turn = z.infer<typeof TurnSchema>;

const jobContextBase = {
  job_id: z.string(),
  session_id: z.string(),
  turn_index: z.number().int(),
  lease_expires_at: z.number(),
  scenario: z.string(),
  kind: z.enum(["shape2d", "coco"]),
  history: z.array(TurnSchema),
  canvas: LayoutSchema,
  legal_acts: z.array(z.string()),
};

// strict(): any unexpected key (a leaked `reference`, say) fails validation
export const DesignerJobSchema = z
  .object({
    ...jobContextBase,
    role: z.literal("designer"),
    instruction: z.string().nullable(),
  })
  .strict();
export type DesignerJob = z.infer<typeof DesignerJobSchema>;

export const DirectorJobSchema = z
  .object({
    ...jobContextBase,
    role: z.literal("director"),
    reference: LayoutSchema,
    match_now: z.union([z.boolean(), z.number()]),
  })
  .strict();
export type DirectorJob = z.infer<typeof DirectorJobSchema>;

export type JobContext = DesignerJob | DirectorJob;

export const SubmitRequestSchema = z.object({
  worker_id: z.string().min(1),
  act: z.string().min(1),
  utterance: z.string(),
  canvas: LayoutSchema.optional(),
  origin: z.string().default("human"),
});
export type SubmitRequest = z.infer<typeof SubmitRequestSchema>;

export const SubmitResponseSchema = z.object({
  verdict: z.enum(["accepted", "rejected", "flagged"]),
  notes: z.array(z.string()),
  derived_act: z.string().nullable(),
  derived_edits: z.array(z.record(z.unknown())),
  session_status: z.string(),
});
export type SubmitResponse = z.infer<typeof SubmitResponseSchema>;

const sessionViewBase = {
  session_id: z.string(),
  scenario: z.string(),
  kind: z.enum(["shape2d", "coco"]),
  status: z.string(),
  round_count: z.number().int(),
  turn_count: z.number().int(),
  history: z.array(TurnSchema),
  canvas: LayoutSchema,
  legal_acts: z.array(z.string()).optional(),
};

export const DesignerSessionViewSchema = z.object(sessionViewBase).strict();
export const DirectorSessionViewSchema = z
  .object({
    ...sessionViewBase,
    reference: LayoutSchema,
    match_now: z.union([z.boolean(), z.number()]),
  })
  .strict();
export type SessionView =
  | z.infer<typeof DesignerSessionViewSchema>
  | z.infer<typeof DirectorSessionViewSchema>;

export interface ClientConfig {
  baseUrl: string;
  pollMs: number;
}

export const DEFAULT_CONFIG: ClientConfig = {
  baseUrl: "",
  pollMs: 3000,
};
