import { z } from "zod";

/**
 * Wire contract with the study harness. Everything that crosses the HTTP
 * boundary is parsed through these schemas, in both directions, so a
 * drifting server shows up as a loud validation error instead of silent
 * undefined fields.
 */

export const SessionViewSchema = z.object({
  session_id: z.string().min(1),
  participant_id: z.string().min(1),
  study_id: z.string().min(1),
  question_count: z.number().int().nonnegative(),
  completed: z.boolean(),
});
export type SessionView = z.infer<typeof SessionViewSchema>;

export const PlanSlotSchema = z.object({
  slot: z.string().length(1),
  text: z.string().min(1),
});
export type PlanSlot = z.infer<typeof PlanSlotSchema>;

export const LikertItemSchema = z.object({
  construct_id: z.string().min(1),
  prompt: z.string().min(1),
  scale_points: z.literal(7),
});
export type LikertItem = z.infer<typeof LikertItemSchema>;

export const TaskViewSchema = z.object({
  question_index: z.number().int().nonnegative(),
  question_count: z.number().int().positive(),
  kind: z.enum(["rank", "rate"]),
  clip: z.object({ clip_id: z.string().min(1), url: z.string().min(1) }),
  plans: z.array(PlanSlotSchema).min(2),
  likert_items: z.array(LikertItemSchema).optional(),
});
export type TaskView = z.infer<typeof TaskViewSchema>;

const likertValue = z.number().int().min(1).max(7);

export const RankSubmissionSchema = z.object({
  question_index: z.number().int().nonnegative(),
  ranking: z.array(z.string().length(1)).min(2),
  free_text: z.string().optional(),
});
export type RankSubmission = z.infer<typeof RankSubmissionSchema>;

export const RateSubmissionSchema = z.object({
  question_index: z.number().int().nonnegative(),
  likert: z.record(z.string(), z.record(z.string(), likertValue)),
  preference: z.string().length(1),
  free_text: z.string().optional(),
});
export type RateSubmission = z.infer<typeof RateSubmissionSchema>;

export const SubmitAckSchema = z.object({
  ok: z.literal(true),
  completed: z.boolean(),
});
export type SubmitAck = z.infer<typeof SubmitAckSchema>;
