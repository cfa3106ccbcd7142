/**
 * Wire schemas for the survey HTTP API.
 *
 * Every payload crossing the network is validated against these schemas:
 * requests before sending (so the client can only emit schema-valid
 * responses) and replies after receiving. Blinding is enforced separately
 * by assertNoTruthLeak, which rejects any pre-closure payload carrying a
 * truth field at any depth.
 */
import { z } from "zod";

export const CHOICES = [
  "a_human_b_machine",
  "a_machine_b_human",
  "both_human",
  "both_machine",
] as const;
export type Choice = (typeof CHOICES)[number];

export const CHOICE_LABELS: Record<Choice, string> = {
  a_human_b_machine: "A written by a physician, B by a machine",
  a_machine_b_human: "A written by a machine, B by a physician",
  both_human: "Both written by physicians",
  both_machine: "Both written by machines",
};

export const CRITERIA = [
  "familiarity_voice",
  "specificity_details",
  "continuity_coherence",
  "sentence_writing_quality",
] as const;
export type Criterion = (typeof CRITERIA)[number];

export const CRITERION_LABELS: Record<Criterion, string> = {
  familiarity_voice: "Familiarity and voice",
  specificity_details: "Specificity or vagueness of details",
  continuity_coherence: "Continuity and coherence",
  sentence_writing_quality: "Writing quality at sentence level",
};

export const phaseSchema = z.enum(["pre_image", "post_image"]);
export type Phase = z.infer<typeof phaseSchema>;

export const criterionRatingSchema = z.object({
  criterion: z.enum(CRITERIA),
  selected: z.boolean(),
  importance: z.number().int().min(1).max(5),
});

export const responsePayloadSchema = z.object({
  case_id: z.string().min(1),
  phase: phaseSchema,
  choice: z.enum(CHOICES),
  confidence: z.number().int().min(1).max(5),
  criteria: z.array(criterionRatingSchema).max(CRITERIA.length),
});
export type ResponsePayload = z.infer<typeof responsePayloadSchema>;

export const sessionSummarySchema = z.object({
  session_id: z.string().min(1),
  rater_role: z.enum(["radiologist", "neurologist", "other_physician"]),
  case_order: z.array(z.string()),
  state: z.enum(["open", "image_phase", "closed"]),
  answered_pre: z.array(z.string()),
  answered_post: z.array(z.string()),
});
export type SessionSummary = z.infer<typeof sessionSummarySchema>;

export const nextCaseSchema = z.object({
  case_id: z.string(),
  report_a: z.string(),
  report_b: z.string(),
  phase: phaseSchema,
  progress: z.object({ answered: z.number().int(), total: z.number().int() }),
  state: z.enum(["open", "image_phase"]),
  image_refs: z.array(z.string()).optional(),
  pre_image_response: z
    .object({
      choice: z.enum(CHOICES),
      confidence: z.number().int(),
      criteria: z.array(criterionRatingSchema),
    })
    .nullable()
    .optional(),
});
export type NextCase = z.infer<typeof nextCaseSchema>;

export const sessionDoneSchema = z.object({
  done: z.literal(true),
  state: z.string(),
});

export const nextOrDoneSchema = z.union([nextCaseSchema, sessionDoneSchema]);

export const submitAckSchema = z.object({
  status: z.literal("ok"),
  duplicate: z.boolean(),
  state: z.string(),
});

export const revealReplySchema = z.object({
  state: z.string(),
  images: z.record(z.string(), z.array(z.string())),
});

/** Reject any payload that names a truth field anywhere before closure. */
export function assertNoTruthLeak(value: unknown, context: string): void {
  const walk = (node: unknown, path: string): void => {
    if (Array.isArray(node)) {
      node.forEach((item, i) => walk(item, `${path}[${i}]`));
      return;
    }
    if (node && typeof node === "object") {
      for (const [key, child] of Object.entries(node)) {
        if (key === "truth" || key.endsWith("_truth") || key.startsWith("truth_")) {
          throw new Error(`truth label leaked at ${path}.${key} in ${context}`);
        }
        walk(child, `${path}.${key}`);
      }
    }
  };
  walk(value, "$");
}
