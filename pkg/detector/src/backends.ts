/**
 * Detector backends.
 *
 * A backend answers free-text object queries over one image with scored
 * pixel-coordinate boxes. Two implementations ship:
 *
 * - RectBackend: a deterministic reference detector that finds solid
 *   color-keyed rectangles in PNGs (labels map to colors via a palette).
 *   Exists so the adapter contract can be exercised end to end, bit-exactly,
 *   without model weights; pinned as version `rect-v1` for golden files.
 * - HttpBackend: a thin client for a real open-vocabulary detector served
 *   behind an HTTP endpoint (OWL-ViT style: image plus text queries in,
 *   scored boxes out).
 */
import * as fs from "fs";
import { PNG } from "pngjs";

export interface Query {
  label: string;
  prompt: string;
}

export interface RawDetection {
  queryIndex: number;
  score: number;
  /** pixel corner coordinates [x0, y0, x1, y1] */
  box: [number, number, number, number];
}

export interface DecodedImage {
  width: number;
  height: number;
  /** RGBA bytes, row-major */
  data: Uint8Array;
  path: string;
}

export interface DetectorBackend {
  readonly name: string;
  detect(image: DecodedImage, queries: Query[]): Promise<RawDetection[]>;
}

export function decodePng(filePath: string): DecodedImage {
  const png = PNG.sync.read(fs.readFileSync(filePath));
  return { width: png.width, height: png.height, data: png.data, path: filePath };
}

export type Palette = Record<string, [number, number, number]>;

export function loadPalette(filePath: string): Palette {
  const doc = JSON.parse(fs.readFileSync(filePath, "utf-8"));
  const palette: Palette = {};
  for (const [label, rgb] of Object.entries(doc)) {
    if (!Array.isArray(rgb) || rgb.length !== 3) {
      throw new Error(`palette entry for ${label} must be [r, g, b]`);
    }
    palette[label] = rgb as [number, number, number];
  }
  return palette;
}

const COLOR_TOLERANCE = 2;
const MIN_PIXELS = 16;

export class RectBackend implements DetectorBackend {
  readonly name = "rect-v1";

  constructor(private readonly palette: Palette) {}

  async detect(image: DecodedImage, queries: Query[]): Promise<RawDetection[]> {
    const out: RawDetection[] = [];
    queries.forEach((query, queryIndex) => {
      const color = this.palette[query.label];
      if (!color) return; // unknown label: nothing detectable
      const hit = this.findColorRegion(image, color);
      if (hit) out.push({ queryIndex, ...hit });
    });
    return out;
  }

  private findColorRegion(
    image: DecodedImage,
    [r, g, b]: [number, number, number],
  ): { score: number; box: [number, number, number, number] } | null {
    const { width, height, data } = image;
    let x0 = width;
    let y0 = height;
    let x1 = -1;
    let y1 = -1;
    let matched = 0;
    for (let y = 0; y < height; y++) {
      const row = y * width * 4;
      for (let x = 0; x < width; x++) {
        const i = row + x * 4;
        if (
          Math.abs(data[i] - r) <= COLOR_TOLERANCE &&
          Math.abs(data[i + 1] - g) <= COLOR_TOLERANCE &&
          Math.abs(data[i + 2] - b) <= COLOR_TOLERANCE
        ) {
          matched++;
          if (x < x0) x0 = x;
          if (y < y0) y0 = y;
          if (x > x1) x1 = x;
          if (y > y1) y1 = y;
        }
      }
    }
    if (matched < MIN_PIXELS) return null;
    const area = (x1 + 1 - x0) * (y1 + 1 - y0);
    // fill ratio of the bounding rectangle, rounded for stable serialization
    const score = Math.round((matched / area) * 10000) / 10000;
    return { score: Math.min(score, 1), box: [x0, y0, x1 + 1, y1 + 1] };
  }
}

interface HttpDetection {
  query_index: number;
  score: number;
  box: [number, number, number, number];
  normalized?: boolean;
}

export class HttpBackend implements DetectorBackend {
  readonly name: string;

  constructor(
    private readonly endpoint: string,
    private readonly batchSize: number = 8,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {
    this.name = `http:${endpoint}`;
  }

  async detect(image: DecodedImage, queries: Query[]): Promise<RawDetection[]> {
    const out: RawDetection[] = [];
    for (let start = 0; start < queries.length; start += this.batchSize) {
      const batch = queries.slice(start, start + this.batchSize);
      const response = await this.fetchImpl(this.endpoint, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({
          image: fs.readFileSync(image.path).toString("base64"),
          queries: batch.map((q) => q.prompt),
        }),
      });
      if (!response.ok) {
        throw new Error(`detector endpoint returned ${response.status}`);
      }
      const body = (await response.json()) as { detections: HttpDetection[] };
      for (const det of body.detections) {
        let [x0, y0, x1, y1] = det.box;
        if (det.normalized) {
          x0 *= image.width;
          x1 *= image.width;
          y0 *= image.height;
          y1 *= image.height;
        }
        out.push({
          queryIndex: start + det.query_index,
          score: det.score,
          box: [x0, y0, x1, y1],
        });
      }
    }
    return out;
  }
}
