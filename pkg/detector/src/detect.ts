/**
 * Run a detector over every generated image named by a caption manifest and
 * emit the detections file the evaluation side consumes.
 *
 * Images live in one directory as `{caption_id}_{image_index}.png`. Missing
 * images go to a gap report and the run continues; the evaluation side then
 * flags the incomplete caption explicitly.
 */
import * as fs from "fs";
import * as path from "path";

import { DecodedImage, DetectorBackend, decodePng } from "./backends";
import { writeJsonlAtomic } from "./jsonl";
import { readCaptions } from "./manifest";
import { Detection, DetectionsLine } from "./schema";
import { applyTemplate, DEFAULT_TEMPLATE } from "./template";

export interface AdapterJob {
  captionsPath: string;
  imagesDir: string;
  outPath: string;
  imagesPerCaption?: number;
  template?: string;
  /** emit detections scoring at least this much; 0 emits everything */
  scoreFloor?: number;
  gapsPath?: string;
}

export interface JobResult {
  lines: DetectionsLine[];
  gaps: string[];
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}

export async function detectAll(job: AdapterJob, backend: DetectorBackend): Promise<JobResult> {
  const template = job.template ?? DEFAULT_TEMPLATE;
  const imagesPerCaption = job.imagesPerCaption ?? 4;
  const scoreFloor = job.scoreFloor ?? 0;
  const captions = readCaptions(job.captionsPath);

  const lines: DetectionsLine[] = [];
  const gaps: string[] = [];
  for (const caption of captions) {
    const queries = [
      { label: caption.subject, prompt: applyTemplate(template, caption.subject) },
      { label: caption.object, prompt: applyTemplate(template, caption.object) },
    ];
    for (let imageIndex = 0; imageIndex < imagesPerCaption; imageIndex++) {
      const imagePath = path.join(job.imagesDir, `${caption.caption_id}_${imageIndex}.png`);
      if (!fs.existsSync(imagePath)) {
        gaps.push(`${caption.caption_id}_${imageIndex}`);
        continue;
      }
      const image: DecodedImage = decodePng(imagePath);
      const raw = await backend.detect(image, queries);
      const detections: Detection[] = raw
        .filter((d) => d.score >= scoreFloor)
        .map((d) => ({
          label: queries[d.queryIndex].label,
          score: clamp(d.score, 0, 1),
          bbox: [
            clamp(d.box[0], 0, image.width),
            clamp(d.box[1], 0, image.height),
            clamp(d.box[2], 0, image.width),
            clamp(d.box[3], 0, image.height),
          ],
        }));
      // images with nothing detected still get a line: the contract is one
      // record per expected (caption, image index)
      lines.push({
        caption_id: caption.caption_id,
        image_index: imageIndex,
        detections,
      });
    }
  }

  writeJsonlAtomic(job.outPath, lines, {
    artifact: "detections",
    tool: "sprel-detector 0.1.0",
    backend: backend.name,
    template,
    images_per_caption: imagesPerCaption,
    score_floor: scoreFloor,
  });
  if (gaps.length > 0 && job.gapsPath) {
    fs.writeFileSync(job.gapsPath, gaps.map((g) => g + "\n").join(""));
  }
  return { lines, gaps };
}
