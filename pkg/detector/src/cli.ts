#!/usr/bin/env node
/**
 * sprel-detect --captions captions.jsonl --images dir --out detections.jsonl
 *              [--images-per-caption 4] [--template "a photo of a {obj}."]
 *              [--backend rect|http] [--palette palette.json]
 *              [--endpoint url] [--batch 8] [--score-floor 0] [--gaps path]
 */
import { DetectorBackend, HttpBackend, RectBackend, loadPalette } from "./backends";
import { detectAll } from "./detect";
import { DEFAULT_TEMPLATE } from "./template";

interface Flags {
  [key: string]: string;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`flag --${key} needs a value`);
    }
    flags[key] = value;
    i++;
  }
  return flags;
}

function required(flags: Flags, key: string): string {
  const value = flags[key];
  if (!value) throw new Error(`missing required flag --${key}`);
  return value;
}

export async function main(argv: string[]): Promise<number> {
  let flags: Flags;
  try {
    flags = parseFlags(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 1;
  }
  try {
    const backendName = flags["backend"] ?? "rect";
    let backend: DetectorBackend;
    if (backendName === "rect") {
      backend = new RectBackend(loadPalette(required(flags, "palette")));
    } else if (backendName === "http") {
      backend = new HttpBackend(
        required(flags, "endpoint"),
        flags["batch"] ? parseInt(flags["batch"], 10) : 8,
      );
    } else {
      console.error(`unknown backend ${backendName}`);
      return 1;
    }
    const result = await detectAll(
      {
        captionsPath: required(flags, "captions"),
        imagesDir: required(flags, "images"),
        outPath: required(flags, "out"),
        imagesPerCaption: flags["images-per-caption"]
          ? parseInt(flags["images-per-caption"], 10)
          : 4,
        template: flags["template"] ?? DEFAULT_TEMPLATE,
        scoreFloor: flags["score-floor"] ? parseFloat(flags["score-floor"]) : 0,
        gapsPath: flags["gaps"],
      },
      backend,
    );
    console.log(`wrote ${result.lines.length} detection lines to ${flags["out"]}`);
    if (result.gaps.length > 0) {
      console.error(`warning: ${result.gaps.length} expected images missing`);
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
