/**
 * Deterministic test fixtures: five PNGs of color-keyed rectangles, the
 * caption manifest naming them, and the palette the reference backend uses.
 * Rerunning reproduces the committed files byte for byte.
 */
import * as fs from "fs";
import * as path from "path";
import { PNG } from "pngjs";

import { writeJsonlAtomic } from "./jsonl";

export const PALETTE: Record<string, [number, number, number]> = {
  dog: [200, 30, 30],
  cat: [30, 60, 200],
  chair: [30, 160, 40],
  car: [230, 200, 20],
  person: [180, 30, 180],
};

const WIDTH = 128;
const HEIGHT = 96;

interface Rect {
  label: string;
  box: [number, number, number, number];
}

interface Fixture {
  caption_id: string;
  subject: string;
  relation: string;
  object: string;
  text: string;
  rects: Rect[];
}

export const FIXTURES: Fixture[] = [
  {
    caption_id: "c000000",
    subject: "dog",
    relation: "left_of",
    object: "cat",
    text: "A dog to the left of a cat.",
    rects: [
      { label: "dog", box: [8, 30, 40, 70] },
      { label: "cat", box: [80, 25, 118, 75] },
    ],
  },
  {
    caption_id: "c000001",
    subject: "cat",
    relation: "above",
    object: "chair",
    text: "A cat above a chair.",
    rects: [
      { label: "cat", box: [40, 6, 90, 30] },
      { label: "chair", box: [35, 55, 95, 90] },
    ],
  },
  {
    caption_id: "c000002",
    subject: "car",
    relation: "larger",
    object: "dog",
    text: "A car larger than a dog.",
    // dog intentionally absent: exercises the object-missing path
    rects: [{ label: "car", box: [20, 20, 110, 80] }],
  },
  {
    caption_id: "c000003",
    subject: "person",
    relation: "inside",
    object: "car",
    text: "A person inside of a car.",
    rects: [
      { label: "car", box: [15, 10, 115, 88] },
      { label: "person", box: [50, 35, 80, 65] },
    ],
  },
  {
    caption_id: "c000004",
    subject: "dog",
    relation: "separated",
    object: "chair",
    text: "A dog and a chair separated.",
    // nothing detectable: the line must still be emitted, empty
    rects: [],
  },
];

function renderPng(rects: Rect[]): Buffer {
  const png = new PNG({ width: WIDTH, height: HEIGHT });
  for (let i = 0; i < WIDTH * HEIGHT; i++) {
    png.data[i * 4] = 245;
    png.data[i * 4 + 1] = 245;
    png.data[i * 4 + 2] = 240;
    png.data[i * 4 + 3] = 255;
  }
  for (const rect of rects) {
    const [r, g, b] = PALETTE[rect.label];
    const [x0, y0, x1, y1] = rect.box;
    for (let y = y0; y < y1; y++) {
      for (let x = x0; x < x1; x++) {
        const i = (y * WIDTH + x) * 4;
        png.data[i] = r;
        png.data[i + 1] = g;
        png.data[i + 2] = b;
      }
    }
  }
  return PNG.sync.write(png);
}

export function generate(outDir: string): void {
  const imagesDir = path.join(outDir, "images");
  fs.mkdirSync(imagesDir, { recursive: true });
  for (const fixture of FIXTURES) {
    fs.writeFileSync(
      path.join(imagesDir, `${fixture.caption_id}_0.png`),
      renderPng(fixture.rects),
    );
  }
  writeJsonlAtomic(
    path.join(outDir, "captions.jsonl"),
    FIXTURES.map(({ caption_id, subject, relation, object, text }) => ({
      caption_id,
      subject,
      relation,
      object,
      text,
    })),
    { artifact: "caption-manifest", tool: "sprel-detector fixtures" },
  );
  fs.writeFileSync(
    path.join(outDir, "palette.json"),
    JSON.stringify(PALETTE, null, 2) + "\n",
  );
}

if (require.main === module) {
  generate(process.argv[2] ?? path.join(__dirname, "..", "tests", "fixtures"));
  console.log("fixtures written");
}
