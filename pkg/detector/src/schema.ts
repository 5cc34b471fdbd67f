/**
 * Wire formats shared with the evaluation side.
 *
 * One detections line per generated image; a caption manifest line per
 * evaluation caption. Files are JSON lines, optionally starting with a
 * `{"__provenance__": ...}` record that consumers skip.
 */
import { z } from "zod";

export const PROVENANCE_KEY = "__provenance__";

export const BBoxSchema = z
  .array(z.number().min(0))
  .length(4)
  .refine((b) => b[0] <= b[2] && b[1] <= b[3], {
    message: "box corners out of order",
  });

export const DetectionSchema = z
  .object({
    label: z.string().min(1),
    score: z.number().min(0).max(1),
    bbox: BBoxSchema,
  })
  .strict();

export const DetectionsLineSchema = z
  .object({
    caption_id: z.string().min(1),
    image_index: z.number().int().min(0),
    width: z.number().positive().optional(),
    height: z.number().positive().optional(),
    detections: z.array(DetectionSchema),
  })
  .strict();

export const RELATIONS = [
  "left_of",
  "right_of",
  "above",
  "below",
  "overlapping",
  "separated",
  "surrounding",
  "inside",
  "taller",
  "shorter",
  "wider",
  "narrower",
  "larger",
  "smaller",
] as const;

export const CaptionLineSchema = z
  .object({
    caption_id: z.string().min(1),
    subject: z.string().min(1),
    relation: z.enum(RELATIONS),
    object: z.string().min(1),
    text: z.string().min(1),
  })
  .strict();

export type DetectionsLine = z.infer<typeof DetectionsLineSchema>;
export type Detection = z.infer<typeof DetectionSchema>;
export type CaptionLine = z.infer<typeof CaptionLineSchema>;
