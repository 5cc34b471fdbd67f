/** Caption manifest loading. */
import { CaptionLine, CaptionLineSchema } from "./schema";
import { readJsonl } from "./jsonl";

export function readCaptions(filePath: string): CaptionLine[] {
  const captions = readJsonl(filePath).map((record, i) => {
    const parsed = CaptionLineSchema.safeParse(record);
    if (!parsed.success) {
      throw new Error(`${filePath}: caption record ${i} invalid: ${parsed.error.message}`);
    }
    return parsed.data;
  });
  const ids = new Set<string>();
  for (const caption of captions) {
    if (ids.has(caption.caption_id)) {
      throw new Error(`${filePath}: duplicate caption id ${caption.caption_id}`);
    }
    ids.add(caption.caption_id);
  }
  return captions;
}
